//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use nalgebra::DVector;
use sparse_phasemax::formulation::{formulate, is_feasible, SparsePhaseMaxSpec};
use sparse_phasemax::harness::{run_sweep, AxisGrid, Axis, TrialConfig, TrialRecord};
use sparse_phasemax::model::*;
use sparse_phasemax::rng::rng_from_seed;
use sparse_phasemax::solver::{solve, solve_exhaustive, verify_certificate, LpStatus, SolverConfig};
use sparse_phasemax::theory::*;

mod common;

/// Running tally of optimal solves and how many passed the independent re-check.
#[derive(Default)]
struct Certs {
    optimal: usize,
    passed: usize,
}

impl Certs {
    fn record(&mut self, ok: bool) {
        self.optimal += 1;
        self.passed += ok as usize;
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn oracle_equivalence(certs: &mut Certs) -> Outcome {
    const INSTANCES: u64 = 600;
    let cfg = SolverConfig::default();
    let start = Instant::now();
    let (mut conclusive, mut status_agree, mut both_optimal, mut obj_agree) = (0, 0, 0, 0);
    let mut worst = 0.0f64;
    for seed in 0..INSTANCES {
        let t = common::tiny_instance(seed);
        let main = solve(&t.lp, &cfg);
        let oracle = solve_exhaustive(&t.lp).unwrap();
        if main.status == LpStatus::Optimal {
            certs.record(verify_certificate(&t.lp, &main, &cfg).is_some_and(|r| r.passed()));
        }
        if oracle.status == LpStatus::NumericalFailure {
            continue;
        }
        conclusive += 1;
        status_agree += (main.status == oracle.status) as usize;
        if let (Some(a), Some(b)) = (main.objective, oracle.objective) {
            both_optimal += 1;
            let rel = (a - b).abs() / (1.0 + b.abs());
            worst = worst.max(rel);
            obj_agree += (rel <= 1e-6) as usize;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        status_agree == conclusive && obj_agree == both_optimal && secs < 60.0,
        format!(
            "{INSTANCES} instances, status agreement {status_agree}/{conclusive} conclusive, \
             objectives within 1e-6 on {obj_agree}/{both_optimal} (worst {worst:.1e}), {secs:.1}s"
        ),
    )
}

fn feasibility_invariants() -> Outcome {
    let mut rng = rng_from_seed(2024);
    let (mut sym_ok, mut sign_ok) = (0, 0);
    for seed in 0..1000u64 {
        let n = 1 + (seed % 40) as usize;
        let k = 1 + (seed as usize * 7) % n;
        let m = 1 + (seed % 25) as usize;
        let x0 = generate_sparse_signal(n, k, &SignalDistribution::GaussianNonzeros, seed).unwrap();
        let meas = generate_measurements(&x0, m, seed + 1).unwrap();
        let anchor = make_anchor(&x0, 1.0, seed + 2).unwrap();
        let spec = SparsePhaseMaxSpec::from_anchor(&anchor, 0.1, meas.clone()).unwrap();
        if is_feasible(&spec, x0.values(), 0.0) && is_feasible(&spec, &-x0.values(), 0.0) {
            sym_ok += 1;
        }
        let mut h = gaussian_vector(&mut rng, n) * 3.0;
        while !is_feasible(&spec, &(x0.values() + &h), 0.0) {
            h *= 0.5;
        }
        sign_ok += sign_consistency_check(&meas, &x0, &h, 1e-12) as usize;
    }
    outcome(
        sym_ok == 1000 && sign_ok == 1000,
        format!("x0 and -x0 feasible at tol 0 on {sym_ok}/1000; sign check on feasible perturbations {sign_ok}/1000"),
    )
}

/// Relative agreement allowed between the two formula evaluations: a few ulps.
const FORMULA_RTOL: f64 = 8.0 * f64::EPSILON;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= FORMULA_RTOL * a.abs().max(b.abs())
}

fn formula_fidelity() -> Outcome {
    let alphas = [0.25, 0.5, 0.75, 1.0, 0.9];
    let ks = [1usize, 2, 3, 4, 9];
    let ns = [50usize, 128, 1000, 4096];
    let mut points = 0;
    let mut agree = 0;
    let mut worst = 0.0f64;
    let mut track = |a: f64, b: f64| {
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
        close(a, b)
    };
    for (i, &alpha) in alphas.iter().enumerate() {
        for (j, &k) in ks.iter().enumerate() {
            for &n in &ns {
                points += 1;
                let kf = k as f64;
                let nf = n as f64;
                // Second path: rearranged arithmetic, no shared helpers.
                let (lo, hi) = lambda_range(alpha, k).unwrap();
                let ok_range = track(lo, alpha * 0.5 / kf.sqrt()) && track(hi, alpha * 0.75 / kf.sqrt());
                let a2 = alpha * alpha;
                let ok_sparsity = sparsity_bound_ok(k, n, alpha) == (49.0 * kf < a2 * nf);
                let sc2 = kf * ((nf - kf) / kf).ln_1p() / (a2 * a2 * a2 * alpha);
                let ok_sc = track(sample_complexity(k, n, alpha, 1.0).unwrap(), sc2);
                let (s, m) = (1.0 + (i + j) as f64 * 0.5, 8 * (1 + i * 5 + j));
                let d2 = (0.2 * (s / m as f64 * (2.0 * nf / s).ln()).ln()).exp();
                let ok_delta = track(embedding_delta(s, m, n, 1.0).unwrap(), d2);
                agree += (ok_range && ok_sparsity && ok_sc && ok_delta) as usize;
            }
        }
    }
    let pinned = lambda_range(1.0, 4).unwrap() == (0.25, 0.375)
        && close(embedding_delta(1.0, 1, 1, 1.0).unwrap(), 2f64.ln().powf(0.2))
        && !sparsity_bound_ok(1, 49, 1.0)
        && sparsity_bound_ok(1, 50, 1.0);
    outcome(
        agree == points && points >= 100 && pinned,
        format!("{agree}/{points} grid points agree within {FORMULA_RTOL:.1e} relative (worst {worst:.1e}); pinned values {}",
            if pinned { "match" } else { "differ" }),
    )
}

struct Transition {
    outcome: Outcome,
    records: Vec<Vec<TrialRecord>>,
}

fn phase_transition(certs: &mut Certs) -> Transition {
    let (n, k, alpha) = (128usize, 3usize, 0.95);
    let m_top = (10.0 * k as f64 * (n as f64 / k as f64).ln()).ceil();
    let grid = vec![k as f64, 10.0, 20.0, 30.0, 45.0, 60.0, 80.0, m_top];
    let base = TrialConfig::new(n, k, 10, alpha, 20_260_101);
    let start = Instant::now();
    let sweep = run_sweep(&base, &AxisGrid::new(Axis::M, grid.clone()).unwrap(), 50, 1).unwrap();
    let secs = start.elapsed().as_secs_f64();
    for r in sweep.records.iter().flatten() {
        if r.status == LpStatus::Optimal {
            certs.record(r.certificate_ok == Some(true));
        }
    }
    let rates: Vec<f64> = sweep.cells.iter().map(|c| c.success_rate).collect();
    let inversions = rates.windows(2).filter(|w| w[1] < w[0]).count();
    let pass = rates[0] <= 0.10 && *rates.last().unwrap() >= 0.90 && inversions <= 1 && secs < 600.0;
    let table: Vec<String> = grid.iter().zip(&rates).map(|(m, r)| format!("{m}:{r:.2}")).collect();
    Transition {
        outcome: outcome(pass, format!("m:rate {} ({inversions} inversions, {secs:.1}s single-threaded)", table.join(" "))),
        records: sweep.records,
    }
}

fn sign_selection(records: &[Vec<TrialRecord>]) -> Outcome {
    let successes: Vec<&TrialRecord> = records.iter().flatten().filter(|r| r.success).collect();
    let right = successes
        .iter()
        .filter(|r| r.rel_error_plus.unwrap() <= r.rel_error_minus.unwrap())
        .count();
    outcome(
        right == successes.len() && !successes.is_empty(),
        format!("x_hat closer to +x0 than -x0 in {right}/{} successful trials", successes.len()),
    )
}

fn scaling_homogeneity(certs: &mut Certs) -> Outcome {
    let cfg = SolverConfig::default();
    let (mut both_optimal, mut obj_ok, mut both_success, mut x_ok, mut status_same) = (0, 0, 0, 0, 0);
    for seed in 0..100u64 {
        let (n, k, m, alpha) = (24usize, 2usize, 20 + (seed % 30) as usize, 0.9);
        let x0 = generate_sparse_signal(n, k, &SignalDistribution::GaussianNonzeros, seed).unwrap();
        let x3 = x0.scaled(3.0).unwrap();
        let meas = generate_measurements(&x0, m, seed + 1).unwrap();
        let meas3 = MeasurementSet::from_rows(meas.rows().clone(), &x3).unwrap();
        let phi = make_anchor(&x0, alpha, seed + 2).unwrap().phi().clone();
        let lambda = lambda_midpoint(alpha, k).unwrap();
        let spec = SparsePhaseMaxSpec::new(phi.clone(), lambda, meas).unwrap();
        let spec3 = SparsePhaseMaxSpec::new(phi, lambda, meas3).unwrap();
        let (lp, lp3) = (formulate(&spec), formulate(&spec3));
        let (a, b) = (solve(&lp, &cfg), solve(&lp3, &cfg));
        status_same += (a.status == b.status) as usize;
        for (p, s) in [(&lp, &a), (&lp3, &b)] {
            if s.status == LpStatus::Optimal {
                certs.record(verify_certificate(p, s, &cfg).is_some_and(|r| r.passed()));
            }
        }
        let (Some(oa), Some(ob)) = (a.objective, b.objective) else { continue };
        both_optimal += 1;
        obj_ok += ((ob - 3.0 * oa).abs() <= 1e-6 * (3.0 * oa).abs().max(1e-300)) as usize;
        let (xa, xb) = (a.x_part(n).unwrap(), b.x_part(n).unwrap());
        let rel = |x: &DVector<f64>, t: &SparseSignal| (x - t.values()).norm() / t.norm();
        if rel(&xa, &x0) <= 1e-5 && rel(&xb, &x3) <= 1e-5 {
            both_success += 1;
            x_ok += ((&xb - &xa * 3.0).norm() <= 1e-5 * xb.norm()) as usize;
        }
    }
    outcome(
        status_same == 100 && obj_ok == both_optimal && x_ok == both_success && both_optimal > 0,
        format!(
            "100 pairs: same status {status_same}/100, objective ratio 3 on {obj_ok}/{both_optimal}, \
             x_hat ratio 3 on {x_ok}/{both_success} jointly recovered"
        ),
    )
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let p = |name: &str| d.join(name).to_str().unwrap().to_string();
    let problem = ["--n", "16", "--k", "2", "--m", "24", "--alpha", "0.9", "--seed", "31"];
    let with = |cmd: &str, extra: &[&str]| -> Vec<String> {
        let mut v = vec![cmd.to_string()];
        v.extend(problem.iter().map(|s| s.to_string()));
        v.extend(extra.iter().map(|s| s.to_string()));
        v
    };
    let (gen_out, solve_out) = (p("problem.json"), p("solution.json"));
    let mut runs: Vec<(Vec<String>, Vec<String>)> = vec![
        (with("gen", &["--out", &gen_out]), vec![gen_out.clone()]),
        (vec!["solve".into(), "--problem".into(), gen_out.clone(), "--out".into(), solve_out.clone()], vec![solve_out]),
        (with("trial", &["--trial-index", "3", "--out", &p("trial.json")]), vec![p("trial.json")]),
        (vec!["check", "--n", "128", "--k", "3", "--m", "60", "--alpha", "0.95", "--out", &p("check.json")]
            .into_iter().map(String::from).collect(), vec![p("check.json")]),
    ];
    let sweep_dir = p("sweep");
    runs.push((
        with("sweep", &["--axis", "m", "--grid", "4,12,24", "--trials", "4", "--jobs", "3", "--out", &sweep_dir]),
        ["trials.csv", "summary.csv", "sweep.json"].iter().map(|f| format!("{sweep_dir}/{f}")).collect(),
    ));
    let diag_dir = p("diagram");
    runs.push((
        with("diagram", &["--axis1", "m", "--grid1", "4,24", "--axis2", "k", "--grid2", "1,2", "--trials", "3",
            "--jobs", "2", "--out", &diag_dir]),
        ["trials.csv", "summary.csv", "diagram.json"].iter().map(|f| format!("{diag_dir}/{f}")).collect(),
    ));
    let (mut identical, mut total) = (0, 0);
    for (args, files) in &runs {
        let mut snapshots = Vec::new();
        for _ in 0..2 {
            let status = Command::new(env!("CARGO_BIN_EXE_spm")).args(args).output().unwrap().status;
            assert!(status.success(), "spm {args:?} failed");
            snapshots.push(files.iter().map(|f| std::fs::read(f).unwrap()).collect::<Vec<_>>());
        }
        total += 1;
        identical += (snapshots[0] == snapshots[1]) as usize;
    }
    outcome(identical == total, format!("{identical}/{total} commands byte-identical on repeat"))
}

fn one_bit_sanity() -> Outcome {
    let (n, s) = (64usize, 4.0);
    let mut means = Vec::new();
    let mut bounded = true;
    for m in [32usize, 128, 512] {
        let mut total = 0.0;
        for seed in 0..20u64 {
            let summary = one_bit_consistency_experiment(n, s, m, 1, seed).unwrap();
            bounded &= summary.max_observed_distance <= 2.0;
            total += summary.max_observed_distance;
        }
        means.push(total / 20.0);
    }
    let x0 = generate_sparse_signal(n, 4, &SignalDistribution::GaussianNonzeros, 1).unwrap();
    let meas = generate_measurements(&x0, 32, 2).unwrap();
    let x = x0.values() / x0.norm();
    let identical = signs_agree(meas.rows(), &x, &x) && (&x - &x.clone()).norm() == 0.0;
    let trend = means.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        bounded && identical && trend,
        format!("mean max distance over 20 seeds for m=32,128,512: {:.3}, {:.3}, {:.3}", means[0], means[1], means[2]),
    )
}

fn main() {
    let mut certs = Certs::default();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "oracle equivalence", oracle_equivalence(&mut certs)));
    results.push((3, "feasibility and sign invariants", feasibility_invariants()));
    results.push((4, "formula fidelity", formula_fidelity()));
    let transition = phase_transition(&mut certs);
    results.push((6, "sign selection", sign_selection(&transition.records)));
    results.push((5, "recovery phase transition", transition.outcome));
    results.push((7, "scaling homogeneity", scaling_homogeneity(&mut certs)));
    results.push((8, "CLI determinism", cli_determinism()));
    results.push((9, "one-bit experiment sanity", one_bit_sanity()));
    results.push((
        2,
        "certificate soundness",
        outcome(
            certs.passed == certs.optimal && certs.optimal > 0,
            format!("{}/{} optimal solves pass the independent KKT re-check", certs.passed, certs.optimal),
        ),
    ));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (id, name, o) in &results {
        println!("{} criterion {id} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += (!o.pass) as usize;
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
