use nalgebra::{DMatrix, DVector};
use sparse_phasemax::formulation::*;
use sparse_phasemax::model::*;
use sparse_phasemax::solver::*;

mod common;

fn assert_certified(lp: &LpProblem, sol: &LpSolution) {
    let report = verify_certificate(lp, sol, &SolverConfig::default()).expect("optimal solve has a certificate");
    assert!(report.passed(), "{report:?}");
}

fn one_dimensional() -> LpProblem {
    let x0 = common::dense(&[2.0]);
    formulate(&common::spec_from(&[1.0], 1, &x0, &[1.0], 0.5))
}

#[test]
fn one_dimensional_closed_form() {
    let lp = one_dimensional();
    let sol = solve(&lp, &SolverConfig::default());
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.x_part(1).unwrap()[0] - 2.0).abs() < 1e-7);
    assert!((sol.objective.unwrap() - 1.0).abs() < 1e-7);
    assert_certified(&lp, &sol);

    let oracle = solve_exhaustive(&lp).unwrap();
    assert_eq!(oracle.status, LpStatus::Optimal);
    assert!((oracle.x_part(1).unwrap()[0] - 2.0).abs() < 1e-12);
    assert!((oracle.objective.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn unconstrained_coordinate_is_unbounded() {
    let x0 = common::dense(&[1.0, 0.0]);
    let lp = formulate(&common::spec_from(&[1.0, 0.0], 1, &x0, &[0.0, 1.0], 0.5));
    let sol = solve(&lp, &SolverConfig::default());
    assert_eq!(sol.status, LpStatus::Unbounded);
    let ray = sol.ray.unwrap();
    assert!((lp.g() * &ray).iter().all(|v| *v <= 1e-8));
    assert!(lp.c().dot(&ray) > 0.0);
    assert_eq!(solve_exhaustive(&lp).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn orthogonal_measurement_forces_zero() {
    let x0 = common::dense(&[1.0, 0.0]);
    let spec = common::spec_from(&[0.0, 1.0], 1, &x0, &[0.0, 1.0], 0.5);
    assert_eq!(spec.measurements().magnitudes()[0], 0.0);
    let lp = formulate(&spec);
    let sol = solve(&lp, &SolverConfig::default());
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!(sol.x_part(2).unwrap().amax() < 1e-6);
    assert_certified(&lp, &sol);
    let oracle = solve_exhaustive(&lp).unwrap();
    assert_eq!(oracle.status, LpStatus::Optimal);
    assert!(oracle.x_part(2).unwrap().amax() < 1e-9);
}

#[test]
fn large_lambda_gives_zero() {
    let mut checked = 0;
    for seed in 0..200u64 {
        let t = common::tiny_instance(seed);
        if t.spec.lambda() < 1.0 {
            continue;
        }
        checked += 1;
        let sol = solve(&t.lp, &SolverConfig::default());
        assert_eq!(sol.status, LpStatus::Optimal, "seed {seed}");
        assert!(sol.x_part(t.spec.n()).unwrap().amax() < 1e-6, "seed {seed}");
        assert!(sol.objective.unwrap().abs() < 1e-6);
        let oracle = solve_exhaustive(&t.lp).unwrap();
        assert!(oracle.objective.unwrap().abs() < 1e-9);
    }
    assert!(checked > 20);
}

#[test]
fn optimal_solves_certified_and_epigraph_tight() {
    let cfg = SolverConfig::default();
    for seed in 0..20u64 {
        let n = 20;
        let x0 = generate_sparse_signal(n, 2, &SignalDistribution::GaussianNonzeros, seed).unwrap();
        let meas = generate_measurements(&x0, 40, seed + 50).unwrap();
        let anchor = make_anchor(&x0, 0.9, seed + 60).unwrap();
        let spec = SparsePhaseMaxSpec::from_anchor(&anchor, 0.3, meas).unwrap();
        let lp = formulate(&spec);
        let sol = solve(&lp, &cfg);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_certified(&lp, &sol);
        let z = sol.z.as_ref().unwrap();
        for j in 0..n {
            assert!((z[n + j] - z[j].abs()).abs() < 1e-6, "t_{j} not tight");
        }
        let x_hat = sol.x_part(n).unwrap();
        assert!(objective_value(&spec, &x_hat) >= objective_value(&spec, x0.values()) - 1e-6);
    }
}

#[test]
fn adding_rows_never_increases_optimum() {
    let cfg = SolverConfig::default();
    for seed in 0..10u64 {
        let x0 = generate_sparse_signal(12, 2, &SignalDistribution::GaussianNonzeros, seed).unwrap();
        let anchor = make_anchor(&x0, 0.9, seed + 1).unwrap();
        let mut previous: Option<f64> = None;
        for m in [4usize, 8, 16, 32] {
            // Row prefixes are stable in m, so these instances are nested.
            let meas = generate_measurements(&x0, m, seed + 2).unwrap();
            let spec = SparsePhaseMaxSpec::from_anchor(&anchor, 0.2, meas).unwrap();
            let sol = solve(&formulate(&spec), &cfg);
            if let Some(obj) = sol.objective {
                if let Some(p) = previous {
                    assert!(obj <= p + 1e-6 * (1.0 + p.abs()), "seed {seed} m {m}: {obj} > {p}");
                }
                previous = Some(obj);
            }
        }
    }
}

#[test]
fn generic_lp_box() {
    let g = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
    let lp = LpProblem::new(vec![1.0, -2.0], &g, vec![1.0, 1.0, 3.0, 3.0]).unwrap();
    let sol = solve(&lp, &SolverConfig::default());
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective.unwrap() - 7.0).abs() < 1e-7);
    assert!((sol.z.as_ref().unwrap() - DVector::from_vec(vec![1.0, -3.0])).amax() < 1e-6);
    assert_certified(&lp, &sol);
}

#[test]
fn tampered_certificate_rejected() {
    let lp = one_dimensional();
    let mut sol = solve(&lp, &SolverConfig::default());
    sol.z.as_mut().unwrap()[0] = 2.5;
    assert!(!verify_certificate(&lp, &sol, &SolverConfig::default()).unwrap().passed());
}

#[test]
fn config_validation() {
    let bad = SolverConfig { tol_gap: -1.0, ..SolverConfig::default() };
    assert!(bad.validate().is_err());
    assert!(SolverConfig::default().validate().is_ok());
}
