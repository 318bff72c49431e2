//! Ground-truth signals, Gaussian measurement ensembles and anchor vectors.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SpmError};
use crate::rng::{rng_from_seed, SpmRng};

/// How the nonzero entries of a sparse signal are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "values")]
pub enum SignalDistribution {
    /// i.i.d. standard normal nonzeros.
    #[default]
    GaussianNonzeros,
    /// Nonzeros uniformly in {-1, +1}.
    UnitMagnitudeSigns,
    /// Explicit nonzero values, placed on the support in increasing index order.
    ProvidedValues(Vec<f64>),
}

impl SignalDistribution {
    pub fn name(&self) -> &'static str {
        match self {
            SignalDistribution::GaussianNonzeros => "gaussian",
            SignalDistribution::UnitMagnitudeSigns => "signs",
            SignalDistribution::ProvidedValues(_) => "provided",
        }
    }
}

impl fmt::Display for SignalDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SignalDistribution {
    type Err = SpmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "gaussian-nonzeros" => Ok(SignalDistribution::GaussianNonzeros),
            "signs" | "unit-magnitude-signs" => Ok(SignalDistribution::UnitMagnitudeSigns),
            other => Err(invalid(format!(
                "unknown signal distribution `{other}` (expected gaussian or signs)"
            ))),
        }
    }
}

/// A k-sparse vector together with its support.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    values: DVector<f64>,
    support: Vec<usize>,
}

impl SparseSignal {
    /// Builds a signal from a dense vector; the support is the set of nonzero
    /// entries, which must be nonempty.
    pub fn from_dense(values: DVector<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("signal contains non-finite entries"));
        }
        let support: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect();
        if support.is_empty() {
            return Err(invalid("signal must have at least one nonzero entry"));
        }
        Ok(Self { values, support })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    /// Sorted support indices.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_dense(&self.values * c)
    }
}

/// Draws a k-sparse n-vector with a uniformly random support.
pub fn generate_sparse_signal(
    n: usize,
    k: usize,
    dist: &SignalDistribution,
    seed: u64,
) -> Result<SparseSignal> {
    if k < 1 || k > n {
        return Err(invalid(format!("sparsity k={k} must satisfy 1 <= k <= n={n}")));
    }
    if let SignalDistribution::ProvidedValues(v) = dist {
        if v.len() != k {
            return Err(invalid(format!(
                "provided values have length {}, expected k={k}",
                v.len()
            )));
        }
        if v.iter().any(|x| *x == 0.0 || !x.is_finite()) {
            return Err(invalid("provided values must be finite and nonzero"));
        }
    }

    let mut rng = rng_from_seed(seed);
    let mut support = index::sample(&mut rng, n, k).into_vec();
    support.sort_unstable();

    let mut values = DVector::zeros(n);
    for (slot, &j) in support.iter().enumerate() {
        values[j] = match dist {
            SignalDistribution::GaussianNonzeros => loop {
                // A zero draw would shrink the support; it has probability zero.
                let g: f64 = rng.sample(StandardNormal);
                if g != 0.0 {
                    break g;
                }
            },
            SignalDistribution::UnitMagnitudeSigns => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            SignalDistribution::ProvidedValues(v) => v[slot],
        };
    }
    Ok(SparseSignal { values, support })
}

/// Measurement vectors `a_i` (the rows of an m x n matrix) and magnitudes
/// `b_i = |<a_i, x0>|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    rows: DMatrix<f64>,
    magnitudes: DVector<f64>,
}

impl MeasurementSet {
    /// Measures `x0` against the given rows.
    pub fn from_rows(rows: DMatrix<f64>, x0: &SparseSignal) -> Result<Self> {
        if rows.nrows() == 0 {
            return Err(invalid("measurement count m must be at least 1"));
        }
        if rows.ncols() != x0.n() {
            return Err(SpmError::DimensionMismatch(format!(
                "rows have {} columns but the signal has length {}",
                rows.ncols(),
                x0.n()
            )));
        }
        let magnitudes = (&rows * x0.values()).abs();
        Ok(Self { rows, magnitudes })
    }

    /// Wraps user-provided rows and magnitudes without a known signal.
    pub fn from_parts(rows: DMatrix<f64>, magnitudes: DVector<f64>) -> Result<Self> {
        if rows.nrows() == 0 {
            return Err(invalid("measurement count m must be at least 1"));
        }
        if magnitudes.len() != rows.nrows() {
            return Err(SpmError::DimensionMismatch(format!(
                "{} magnitudes for {} rows",
                magnitudes.len(),
                rows.nrows()
            )));
        }
        if magnitudes.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
            return Err(invalid("magnitudes must be finite and nonnegative"));
        }
        Ok(Self { rows, magnitudes })
    }

    pub fn m(&self) -> usize {
        self.rows.nrows()
    }

    pub fn n(&self) -> usize {
        self.rows.ncols()
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn magnitudes(&self) -> &DVector<f64> {
        &self.magnitudes
    }
}

/// Fills an m x n matrix with standard normal deviates in row-major order.
pub fn gaussian_matrix(rng: &mut SpmRng, m: usize, n: usize) -> DMatrix<f64> {
    let data: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_row_slice(m, n, &data)
}

pub fn gaussian_vector(rng: &mut SpmRng, n: usize) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Draws m i.i.d. N(0, I_n) rows and records the magnitudes of `x0`.
///
/// Rows are drawn in row-major order from one stream, so the first `m'` rows
/// for a seed do not depend on `m >= m'`.
pub fn generate_measurements(x0: &SparseSignal, m: usize, seed: u64) -> Result<MeasurementSet> {
    if m < 1 {
        return Err(invalid("measurement count m must be at least 1"));
    }
    let mut rng = rng_from_seed(seed);
    let rows = gaussian_matrix(&mut rng, m, x0.n());
    MeasurementSet::from_rows(rows, x0)
}

/// A unit vector with recorded correlation `alpha` to the normalized signal.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorVector {
    phi: DVector<f64>,
    alpha: f64,
}

impl AnchorVector {
    /// Wraps a given anchor; `phi` is normalized and `alpha` recorded as-is.
    pub fn from_parts(phi: DVector<f64>, alpha: f64) -> Result<Self> {
        let norm = phi.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(invalid("anchor must be a nonzero finite vector"));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid(format!("alpha={alpha} must lie in (0, 1]")));
        }
        Ok(Self {
            phi: phi / norm,
            alpha,
        })
    }

    pub fn phi(&self) -> &DVector<f64> {
        &self.phi
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `<phi, x0 / ||x0||>`.
    pub fn correlation_with(&self, x0: &SparseSignal) -> f64 {
        self.phi.dot(x0.values()) / x0.norm()
    }
}

/// Builds `phi = alpha * u + sqrt(1 - alpha^2) * w` with `u = x0 / ||x0||`
/// and `w` a uniformly random unit vector orthogonal to `u`.
pub fn make_anchor(x0: &SparseSignal, alpha: f64, seed: u64) -> Result<AnchorVector> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha={alpha} must lie in (0, 1]")));
    }
    let u = x0.values() / x0.norm();
    if alpha == 1.0 {
        return Ok(AnchorVector { phi: u, alpha });
    }
    let n = x0.n();
    if n < 2 {
        return Err(invalid("alpha < 1 needs n >= 2 for an orthogonal direction"));
    }

    let mut rng = rng_from_seed(seed);
    let w = loop {
        let g = gaussian_vector(&mut rng, n);
        let mut p = &g - &u * u.dot(&g);
        // Second projection pass removes the rounding residue along u.
        p -= &u * u.dot(&p);
        let norm = p.norm();
        if norm > 1e-12 * g.norm() {
            break p / norm;
        }
    };

    let beta = (1.0 - alpha * alpha).sqrt();
    let mut phi = &u * alpha + &w * beta;
    phi /= phi.norm();
    Ok(AnchorVector { phi, alpha })
}

/// Convergence budget for [`heuristic_initializer`].
pub const POWER_ITERATION_MAX_ITERS: usize = 1000;
pub const POWER_ITERATION_TOL: f64 = 1e-8;

/// Support-thresholded power iteration on the magnitude-weighted covariance.
///
/// Ranks coordinates by `(1/m) sum_i b_i^2 a_ij^2`, keeps the top `k`, and
/// returns the leading eigenvector of the k x k restriction of
/// `(1/m) sum_i b_i^2 a_i a_i^T`, zero-extended to length n. The sign is
/// arbitrary. No recovery guarantee is attached to this estimate.
pub fn heuristic_initializer(meas: &MeasurementSet, k: usize) -> Result<DVector<f64>> {
    let (m, n) = (meas.m(), meas.n());
    if k < 1 || k > n {
        return Err(invalid(format!("sparsity k={k} must satisfy 1 <= k <= n={n}")));
    }
    let rows = meas.rows();
    let weights = meas.magnitudes().map(|b| b * b);

    let mut scores: Vec<(usize, f64)> = (0..n)
        .map(|j| {
            let s: f64 = (0..m).map(|i| weights[i] * rows[(i, j)] * rows[(i, j)]).sum();
            (j, s / m as f64)
        })
        .collect();
    // Descending score; ties broken by index for determinism.
    scores.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut support: Vec<usize> = scores[..k].iter().map(|(j, _)| *j).collect();
    support.sort_unstable();

    let restricted = rows.select_columns(&support);
    let mut cov = DMatrix::<f64>::zeros(k, k);
    for i in 0..m {
        let r = restricted.row(i);
        cov.ger(weights[i] / m as f64, &r.transpose(), &r.transpose(), 1.0);
    }

    let mut v = DVector::from_element(k, 1.0 / (k as f64).sqrt());
    let mut converged = false;
    for _ in 0..POWER_ITERATION_MAX_ITERS {
        let next = &cov * &v;
        let norm = next.norm();
        if !(norm > 0.0) {
            break;
        }
        let next = next / norm;
        let change = (&next - &v).norm();
        v = next;
        if change < POWER_ITERATION_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpmError::NoConvergence(POWER_ITERATION_MAX_ITERS));
    }

    let mut out = DVector::zeros(n);
    for (slot, &j) in support.iter().enumerate() {
        out[j] = v[slot];
    }
    Ok(out)
}
