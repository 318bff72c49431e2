//! Parameter conditions of the recovery guarantee and the sign-consistency
//! facts behind it.
//!
//! The guarantee's universal constants have no known values. They appear
//! here as explicit parameters defaulting to 1, so every number produced is
//! a shape, not a prediction. Logarithms are natural.

use nalgebra::DVector;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{gaussian_matrix, MeasurementSet, SparseSignal};
use crate::rng::{mix_seed, rng_from_seed, SpmRng};

/// Inputs to the recovery conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremParams {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub alpha: f64,
    pub lambda: f64,
    /// Stand-in for the sample-complexity constant.
    pub c1_constant: f64,
    /// Stand-in for the binary-embedding constant.
    pub embedding_constant: f64,
}

impl TheoremParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.m == 0 {
            return Err(invalid("n, k and m must be positive"));
        }
        check_alpha(self.alpha)?;
        if !(self.lambda > 0.0 && self.c1_constant > 0.0 && self.embedding_constant > 0.0) {
            return Err(invalid("lambda and constants must be positive"));
        }
        Ok(())
    }
}

/// Effective sparsity `s` together with the resulting embedding distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub s: f64,
    pub m: usize,
    pub n: usize,
    pub delta: f64,
}

impl EmbeddingParams {
    pub fn new(s: f64, m: usize, n: usize, embedding_constant: f64) -> Result<Self> {
        let delta = embedding_delta(s, m, n, embedding_constant)?;
        Ok(Self { s, m, n, delta })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha={alpha} must lie in (0, 1]")));
    }
    Ok(())
}

/// Open interval `(alpha / (2 sqrt k), 3 alpha / (4 sqrt k))` of admissible
/// l1 weights.
pub fn lambda_range(alpha: f64, k: usize) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if k < 1 {
        return Err(invalid("k must be at least 1"));
    }
    let root = (k as f64).sqrt();
    Ok((alpha / (2.0 * root), 3.0 * alpha / (4.0 * root)))
}

/// Midpoint `0.625 alpha / sqrt k` of [`lambda_range`].
pub fn lambda_midpoint(alpha: f64, k: usize) -> Result<f64> {
    let (lo, hi) = lambda_range(alpha, k)?;
    Ok(0.5 * (lo + hi))
}

pub fn lambda_in_range(lambda: f64, alpha: f64, k: usize) -> Result<bool> {
    let (lo, hi) = lambda_range(alpha, k)?;
    Ok(lo < lambda && lambda < hi)
}

/// `k < alpha^2 n / 49`, strictly.
pub fn sparsity_bound_ok(k: usize, n: usize, alpha: f64) -> bool {
    (k as f64) < alpha * alpha * n as f64 / 49.0
}

/// `(c1 / alpha^7) k ln(n / k)`; requires `k < n`.
pub fn sample_complexity(k: usize, n: usize, alpha: f64, c1_constant: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if k < 1 || k >= n {
        return Err(invalid(format!("sample complexity needs 1 <= k < n (k={k}, n={n})")));
    }
    Ok(c1_constant / alpha.powi(7) * k as f64 * (n as f64 / k as f64).ln())
}

/// `C ((s / m) ln(2n / s))^(1/5)` for `0 < s <= n`, `m >= 1`.
pub fn embedding_delta(s: f64, m: usize, n: usize, embedding_constant: f64) -> Result<f64> {
    if !(s > 0.0) || s > n as f64 {
        return Err(invalid(format!("effective sparsity s={s} must satisfy 0 < s <= n={n}")));
    }
    if m < 1 {
        return Err(invalid("m must be at least 1"));
    }
    Ok(embedding_constant * ((s / m as f64) * (2.0 * n as f64 / s).ln()).powf(0.2))
}

/// True iff `<a_i, x0> <a_i, h> <= tol` for every measurement row.
///
/// Any `h` with `x0 + h` feasible satisfies this at `tol = 0` up to rounding,
/// because `|u + v| <= |u|` forces `u v <= 0` row by row.
pub fn sign_consistency_check(
    meas: &MeasurementSet,
    x0: &SparseSignal,
    h: &DVector<f64>,
    tol: f64,
) -> bool {
    let ax = meas.rows() * x0.values();
    let ah = meas.rows() * h;
    ax.iter().zip(ah.iter()).all(|(u, v)| u * v <= tol)
}

/// Proposals drawn per trial by [`one_bit_consistency_experiment`].
pub const ONE_BIT_PROPOSALS_PER_TRIAL: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneBitSummary {
    /// Largest l2 distance among kept sign-consistent pairs (0 if none).
    pub max_observed_distance: f64,
    pub delta_predicted: f64,
    /// Number of sign-consistent pairs kept across all trials.
    pub pairs_tested: usize,
}

/// `true` iff `<a_i, x> <a_i, y> >= 0` for every row.
pub fn signs_agree(rows: &nalgebra::DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> bool {
    let ax = rows * x;
    let ay = rows * y;
    ax.iter().zip(ay.iter()).all(|(u, v)| u * v >= 0.0)
}

/// Random exactly-sparse unit vector with `support` nonzeros, which satisfies
/// `||x||_1 <= sqrt(support)`.
fn sparse_unit(rng: &mut SpmRng, n: usize, support: usize) -> DVector<f64> {
    let mut v = DVector::<f64>::zeros(n);
    for j in index::sample(rng, n, support).into_iter() {
        v[j] = rng.sample(StandardNormal);
    }
    let norm = v.norm();
    if norm > 0.0 {
        v / norm
    } else {
        sparse_unit(rng, n, support)
    }
}

/// Monte Carlo illustration of the binary-embedding property.
///
/// Each trial draws a fresh m x n Gaussian ensemble, then makes
/// [`ONE_BIT_PROPOSALS_PER_TRIAL`] proposals: a random `floor(s)`-sparse unit
/// vector `x` and `x_hat = normalize(x + eps g)` with `g` an independent
/// sparse unit direction and `eps` log-uniform on [0.01, 10]. Proposals with
/// `||x_hat||_1 <= sqrt(s)` whose measurement signs agree on every row are
/// kept. The maximum kept distance is compared with [`embedding_delta`].
///
/// This estimates typical behaviour; it does not probe the worst case over
/// all pairs, which is what the uniform statement bounds.
pub fn one_bit_consistency_experiment(
    n: usize,
    s: f64,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<OneBitSummary> {
    one_bit_consistency_experiment_with(n, s, m, trials, seed, ONE_BIT_PROPOSALS_PER_TRIAL, 1.0)
}

pub fn one_bit_consistency_experiment_with(
    n: usize,
    s: f64,
    m: usize,
    trials: usize,
    seed: u64,
    proposals_per_trial: usize,
    embedding_constant: f64,
) -> Result<OneBitSummary> {
    if trials < 1 {
        return Err(invalid("trials must be at least 1"));
    }
    let delta_predicted = embedding_delta(s, m, n, embedding_constant)?;
    if s < 1.0 {
        return Err(invalid("effective sparsity must be at least 1 for sparse sampling"));
    }
    let support = (s.floor() as usize).min(n);
    let l1_cap = s.sqrt();

    let mut max_dist = 0.0f64;
    let mut kept = 0usize;
    for trial in 0..trials {
        let mut rng = rng_from_seed(mix_seed(seed, &[trial as u64]));
        let rows = gaussian_matrix(&mut rng, m, n);
        for _ in 0..proposals_per_trial {
            let x = sparse_unit(&mut rng, n, support);
            let dir = sparse_unit(&mut rng, n, support);
            let eps = 10f64.powf(rng.random_range(-2.0..1.0));
            let raw = &x + &dir * eps;
            let norm = raw.norm();
            if !(norm > 0.0) {
                continue;
            }
            let x_hat = raw / norm;
            if x_hat.lp_norm(1) > l1_cap || !signs_agree(&rows, &x, &x_hat) {
                continue;
            }
            kept += 1;
            max_dist = max_dist.max((&x_hat - &x).norm());
        }
    }
    Ok(OneBitSummary {
        max_observed_distance: max_dist,
        delta_predicted,
        pairs_tested: kept,
    })
}
