#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use sparse_phasemax::formulation::{formulate, LpProblem, SparsePhaseMaxSpec};
use sparse_phasemax::model::{
    generate_measurements, generate_sparse_signal, make_anchor, MeasurementSet, SignalDistribution,
    SparseSignal,
};
use sparse_phasemax::rng::rng_from_seed;

pub struct Tiny {
    pub x0: SparseSignal,
    pub spec: SparsePhaseMaxSpec,
    pub lp: LpProblem,
}

/// Random SparsePhaseMax instance with n <= 3, m <= 4 and lambda in [0, 1.5].
pub fn tiny_instance(seed: u64) -> Tiny {
    let mut rng = rng_from_seed(seed ^ 0x5eed_f00d);
    let n = rng.random_range(1..=3usize);
    let m = rng.random_range(1..=4usize);
    let k = rng.random_range(1..=n);
    let alpha = if n == 1 { 1.0 } else { rng.random_range(0.1..=1.0) };
    let lambda = rng.random_range(0.0..=1.5);
    let x0 = generate_sparse_signal(n, k, &SignalDistribution::GaussianNonzeros, seed).unwrap();
    let meas = generate_measurements(&x0, m, seed.wrapping_add(1)).unwrap();
    let anchor = make_anchor(&x0, alpha, seed.wrapping_add(2)).unwrap();
    let spec = SparsePhaseMaxSpec::from_anchor(&anchor, lambda, meas).unwrap();
    let lp = formulate(&spec);
    Tiny { x0, spec, lp }
}

pub fn dense(v: &[f64]) -> SparseSignal {
    SparseSignal::from_dense(DVector::from_column_slice(v)).unwrap()
}

pub fn spec_from(rows: &[f64], m: usize, x0: &SparseSignal, phi: &[f64], lambda: f64) -> SparsePhaseMaxSpec {
    let meas = MeasurementSet::from_rows(DMatrix::from_row_slice(m, x0.n(), rows), x0).unwrap();
    SparsePhaseMaxSpec::new(DVector::from_column_slice(phi), lambda, meas).unwrap()
}
