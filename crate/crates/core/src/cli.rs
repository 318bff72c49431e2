//! The `spm` command line.
//!
//! Exit codes: 0 success (or optimal), 2 usage or validation error,
//! 3 unbounded, 4 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::harness::{
    phase_diagram, run_sweep, run_trial, write_outputs, Axis, AxisGrid, LambdaMode, TrialConfig,
    TrialRecord,
};
use crate::instance::{ProblemInstance, SolutionFile};
use crate::model::SignalDistribution;
use crate::solver::{solve, LpStatus, SolverConfig};
use crate::theory::{
    embedding_delta, lambda_in_range, lambda_midpoint, lambda_range, sample_complexity,
    sparsity_bound_ok, TheoremParams,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNBOUNDED: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "spm",
    version,
    about = "Sparse phase retrieval by an anchored linear program"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a problem-instance JSON file.
    Gen(GenArgs),
    /// Solve a problem-instance file and write a solution JSON file.
    Solve(SolveArgs),
    /// Evaluate the recovery conditions for given parameters (JSON on stdout).
    Check(CheckArgs),
    /// Run one seeded recovery trial and print its record as JSON.
    Trial(TrialArgs),
    /// Sweep one parameter and write trials.csv, summary.csv and sweep.json.
    Sweep(SweepArgs),
    /// Two-parameter grid; writes trials.csv, summary.csv and diagram.json.
    Diagram(DiagramArgs),
}

#[derive(Debug, Args)]
struct ProblemFlags {
    /// Signal dimension.
    #[arg(long)]
    n: usize,
    /// Sparsity (number of nonzeros).
    #[arg(long)]
    k: usize,
    /// Number of magnitude measurements.
    #[arg(long)]
    m: usize,
    /// Correlation of the anchor with the normalized signal, in (0, 1].
    #[arg(long)]
    alpha: f64,
    /// Explicit l1 weight (implies --lambda-mode explicit).
    #[arg(long)]
    lambda: Option<f64>,
    /// `midpoint` (0.625 alpha / sqrt k) or `explicit` (requires --lambda).
    #[arg(long = "lambda-mode")]
    lambda_mode: Option<String>,
    /// Nonzero distribution: `gaussian` or `signs`.
    #[arg(long, default_value = "gaussian")]
    dist: String,
    /// Master seed; all randomness derives from it.
    #[arg(long)]
    seed: u64,
}

impl ProblemFlags {
    fn lambda_mode(&self) -> Result<LambdaMode> {
        match (self.lambda_mode.as_deref(), self.lambda) {
            (None | Some("explicit"), Some(l)) => Ok(LambdaMode::Explicit(l)),
            (Some("explicit"), None) => Err(invalid("--lambda-mode explicit requires --lambda")),
            (None | Some("midpoint"), None) => Ok(LambdaMode::Midpoint),
            (Some("midpoint"), Some(_)) => {
                Err(invalid("--lambda conflicts with --lambda-mode midpoint"))
            }
            (Some(other), _) => Err(invalid(format!(
                "unknown --lambda-mode `{other}` (expected midpoint or explicit)"
            ))),
        }
    }

    fn trial_config(&self, tol: f64) -> Result<TrialConfig> {
        let cfg = TrialConfig {
            n: self.n,
            k: self.k,
            m: self.m,
            alpha: self.alpha,
            lambda_mode: self.lambda_mode()?,
            dist: self.dist.parse::<SignalDistribution>()?,
            success_tol: tol,
            solver: SolverConfig::default(),
            seed: self.seed,
        };
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    problem: ProblemFlags,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Problem-instance JSON file.
    #[arg(long)]
    problem: PathBuf,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Measurement count; enables the threshold comparison and delta.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    alpha: f64,
    /// l1 weight to test (defaults to the midpoint of the admissible range).
    #[arg(long)]
    lambda: Option<f64>,
    /// Effective sparsity for delta (defaults to k).
    #[arg(long)]
    s: Option<f64>,
    /// Sample-complexity constant.
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    /// Binary-embedding constant.
    #[arg(long = "embedding-constant", default_value_t = 1.0)]
    embedding_constant: f64,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrialArgs {
    #[command(flatten)]
    problem: ProblemFlags,
    /// Relative recovery tolerance (up to global sign).
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long = "trial-index", default_value_t = 0)]
    trial_index: usize,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit 4 if the solve ends in numerical failure.
    #[arg(long)]
    strict: bool,
    /// Keep the measured wall time instead of writing 0.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct RunFlags {
    /// Relative recovery tolerance (up to global sign).
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    /// Trials per grid point.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Worker threads; affects wall time only.
    #[arg(long, env = "SPM_DEFAULT_JOBS", default_value_t = 1)]
    jobs: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Exit 4 if any trial ends in numerical failure.
    #[arg(long)]
    strict: bool,
    /// Fill the wall_time CSV column (makes outputs run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemFlags,
    #[command(flatten)]
    run: RunFlags,
    /// Parameter to vary: m, k, alpha, lambda or n.
    #[arg(long)]
    axis: String,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<f64>,
}

#[derive(Debug, Args)]
struct DiagramArgs {
    #[command(flatten)]
    problem: ProblemFlags,
    #[command(flatten)]
    run: RunFlags,
    #[arg(long)]
    axis1: String,
    #[arg(long, value_delimiter = ',', required = true)]
    grid1: Vec<f64>,
    #[arg(long)]
    axis2: String,
    #[arg(long, value_delimiter = ',', required = true)]
    grid2: Vec<f64>,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Check(a) => cmd_check(a),
        Command::Trial(a) => cmd_trial(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Diagram(a) => cmd_diagram(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn cmd_gen(a: GenArgs) -> Result<i32> {
    let p = &a.problem;
    let dist = p.dist.parse::<SignalDistribution>()?;
    let inst = ProblemInstance::generate(p.n, p.k, p.m, p.alpha, p.lambda_mode()?, dist, p.seed)?;
    emit(a.out.as_deref(), &inst.to_json()?)?;
    Ok(EXIT_OK)
}

fn cmd_solve(a: SolveArgs) -> Result<i32> {
    let inst = ProblemInstance::read(&a.problem)?;
    let mat = inst.materialize()?;
    let sol = solve(&mat.lp(), &SolverConfig::default());
    let file = SolutionFile::new(&sol, inst.n, mat.signal.as_ref());
    emit(a.out.as_deref(), &file.to_json()?)?;
    Ok(match sol.status {
        LpStatus::Optimal => EXIT_OK,
        LpStatus::Unbounded => EXIT_UNBOUNDED,
        LpStatus::NumericalFailure => EXIT_NUMERICAL,
    })
}

#[derive(Debug, Serialize)]
struct CheckReport {
    n: usize,
    k: usize,
    m: Option<usize>,
    alpha: f64,
    lambda: f64,
    lambda_source: &'static str,
    lambda_range: (f64, f64),
    lambda_in_range: bool,
    /// `alpha^2 n / 49`.
    sparsity_limit: f64,
    sparsity_bound_ok: bool,
    /// `(c1 / alpha^7) k ln(n/k)`, absent when k >= n.
    m_threshold: Option<f64>,
    m_above_threshold: Option<bool>,
    effective_sparsity: f64,
    /// Present when m is given and s <= n.
    delta: Option<f64>,
    c1_constant: f64,
    embedding_constant: f64,
}

fn cmd_check(a: CheckArgs) -> Result<i32> {
    let (lambda, lambda_source) = match a.lambda {
        Some(l) => (l, "explicit"),
        None => (lambda_midpoint(a.alpha, a.k)?, "midpoint"),
    };
    TheoremParams {
        n: a.n,
        k: a.k,
        m: a.m.unwrap_or(1),
        alpha: a.alpha,
        lambda,
        c1_constant: a.c1,
        embedding_constant: a.embedding_constant,
    }
    .validate()?;
    let s = a.s.unwrap_or(a.k as f64);
    let m_threshold = sample_complexity(a.k, a.n, a.alpha, a.c1).ok();
    let report = CheckReport {
        n: a.n,
        k: a.k,
        m: a.m,
        alpha: a.alpha,
        lambda,
        lambda_source,
        lambda_range: lambda_range(a.alpha, a.k)?,
        lambda_in_range: lambda_in_range(lambda, a.alpha, a.k)?,
        sparsity_limit: a.alpha * a.alpha * a.n as f64 / 49.0,
        sparsity_bound_ok: sparsity_bound_ok(a.k, a.n, a.alpha),
        m_threshold,
        m_above_threshold: a.m.zip(m_threshold).map(|(m, t)| m as f64 > t),
        effective_sparsity: s,
        delta: a.m.and_then(|m| embedding_delta(s, m, a.n, a.embedding_constant).ok()),
        c1_constant: a.c1,
        embedding_constant: a.embedding_constant,
    };
    emit(a.out.as_deref(), &to_json(&report)?)?;
    Ok(EXIT_OK)
}

fn cmd_trial(a: TrialArgs) -> Result<i32> {
    let cfg = a.problem.trial_config(a.tol)?;
    let mut record = run_trial(&cfg, a.trial_index)?;
    if !a.timing {
        record.wall_time = 0.0;
    }
    emit(a.out.as_deref(), &to_json(&record)?)?;
    Ok(strict_code(a.strict, std::iter::once(&record)))
}

fn strict_code<'a>(strict: bool, mut records: impl Iterator<Item = &'a TrialRecord>) -> i32 {
    if strict && records.any(|r| r.status == LpStatus::NumericalFailure) {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    }
}

fn cmd_sweep(a: SweepArgs) -> Result<i32> {
    let cfg = a.problem.trial_config(a.run.tol)?;
    let grid = AxisGrid::new(a.axis.parse::<Axis>()?, a.grid)?;
    let result = run_sweep(&cfg, &grid, a.run.trials, a.run.jobs)?;
    for c in &result.cells {
        eprintln!("{}={}: {}/{} recovered", grid.axis, c.value1, c.successes, c.trials);
    }
    write_outputs(&a.run.out, &result.cells, &result.records, "sweep.json", &result, a.run.timing)?;
    Ok(strict_code(a.run.strict, result.records.iter().flatten()))
}

fn cmd_diagram(a: DiagramArgs) -> Result<i32> {
    let cfg = a.problem.trial_config(a.run.tol)?;
    let axis1 = AxisGrid::new(a.axis1.parse::<Axis>()?, a.grid1)?;
    let axis2 = AxisGrid::new(a.axis2.parse::<Axis>()?, a.grid2)?;
    let diagram = phase_diagram(&cfg, &axis1, &axis2, a.run.trials, a.run.jobs)?;
    for c in &diagram.cells {
        eprintln!(
            "{}={}, {}={}: {}/{} recovered",
            axis1.axis,
            c.value1,
            axis2.axis,
            c.value2.unwrap_or(f64::NAN),
            c.successes,
            c.trials
        );
    }
    write_outputs(&a.run.out, &diagram.cells, &diagram.records, "diagram.json", &diagram, a.run.timing)?;
    Ok(strict_code(a.run.strict, diagram.records.iter().flatten()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_mode_resolution() {
        let flags = |lambda: Option<f64>, mode: Option<&str>| ProblemFlags {
            n: 8,
            k: 2,
            m: 4,
            alpha: 0.9,
            lambda,
            lambda_mode: mode.map(String::from),
            dist: "gaussian".into(),
            seed: 0,
        };
        assert_eq!(flags(None, None).lambda_mode().unwrap(), LambdaMode::Midpoint);
        assert_eq!(flags(Some(0.3), None).lambda_mode().unwrap(), LambdaMode::Explicit(0.3));
        assert!(flags(None, Some("explicit")).lambda_mode().is_err());
        assert!(flags(Some(0.3), Some("midpoint")).lambda_mode().is_err());
        assert!(flags(None, Some("bogus")).lambda_mode().is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["spm", "gen", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["spm", "check", "--n", "8"]), EXIT_USAGE);
        assert_eq!(
            run(["spm", "gen", "--n", "8", "--k", "9", "--m", "4", "--alpha", "1", "--seed", "1"]),
            EXIT_USAGE
        );
    }
}
