fn main() {
    std::process::exit(sparse_phasemax::cli::run(std::env::args_os()));
}
