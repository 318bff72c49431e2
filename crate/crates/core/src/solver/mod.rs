//! Dense LP solvers for `maximize c^T z subject to G z <= h`.
//!
//! [`solve`] is a Mehrotra predictor-corrector interior-point method and is the
//! one used everywhere else in the crate. [`solve_exhaustive`] enumerates
//! vertices and extreme rays; it only scales to a handful of variables and
//! exists to cross-check the interior-point answers.

mod certificate;
mod exhaustive;
mod ipm;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use certificate::{verify_certificate, CertificateReport};
pub use exhaustive::{solve_exhaustive, EXHAUSTIVE_MAX_ROWS, EXHAUSTIVE_MAX_VARS};
pub use ipm::solve;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative duality gap `|h^T y - c^T z| / (1 + |c^T z|)` at termination.
    pub tol_gap: f64,
    /// Primal and dual residual tolerance, relative to `1 + ||h||_inf` and
    /// `1 + ||c||_inf` respectively.
    pub tol_feas: f64,
    pub max_iters: usize,
    /// Objective magnitude beyond which the iterates are checked for a ray.
    pub unbounded_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_gap: 1e-8,
            tol_feas: 1e-8,
            max_iters: 200,
            unbounded_threshold: 1e12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_gap > 0.0 && self.tol_feas > 0.0 && self.unbounded_threshold > 0.0) {
            return Err(invalid("solver tolerances must be positive"));
        }
        if self.max_iters < 1 {
            return Err(invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    NumericalFailure,
}

impl LpStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Unbounded => "unbounded",
            LpStatus::NumericalFailure => "numerical-failure",
        }
    }
}

impl std::fmt::Display for LpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dual multipliers proving optimality.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// `y >= 0` with `G^T y = c` up to tolerance.
    pub y: DVector<f64>,
    /// `sum_i y_i (h - G z)_i` at the returned point.
    pub complementarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Full decision vector; present iff optimal.
    pub z: Option<DVector<f64>>,
    pub objective: Option<f64>,
    /// Relative duality gap at the last iterate (NaN when never evaluated).
    pub gap: f64,
    pub iterations: usize,
    /// Present iff optimal and produced by [`solve`]; the exhaustive oracle
    /// returns no multipliers.
    pub certificate: Option<Certificate>,
    /// Direction `r` with `G r <= 0` and `c^T r > 0`; present iff unbounded.
    pub ray: Option<DVector<f64>>,
}

impl LpSolution {
    pub(crate) fn failure(gap: f64, iterations: usize) -> Self {
        Self {
            status: LpStatus::NumericalFailure,
            z: None,
            objective: None,
            gap,
            iterations,
            certificate: None,
            ray: None,
        }
    }

    pub(crate) fn unbounded(ray: DVector<f64>, gap: f64, iterations: usize) -> Self {
        Self {
            status: LpStatus::Unbounded,
            z: None,
            objective: None,
            gap,
            iterations,
            certificate: None,
            ray: Some(ray),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// First `n` entries of the decision vector, i.e. `x` for a formulated
    /// sparse phase-retrieval problem.
    pub fn x_part(&self, n: usize) -> Option<DVector<f64>> {
        self.z.as_ref().map(|z| z.rows(0, n).into_owned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        SolverConfig::default().validate().unwrap();
        let bad = SolverConfig {
            max_iters: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            tol_gap: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
