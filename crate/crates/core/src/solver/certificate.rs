use nalgebra::DVector;

use super::{LpSolution, LpStatus, SolverConfig};
use crate::formulation::LpProblem;

/// Outcome of re-checking an optimal solution against the raw problem data.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    /// `max(0, max_i (G z - h)_i)`.
    pub primal_violation: f64,
    pub primal_bound: f64,
    /// `max(0, -min_i y_i)`.
    pub dual_sign_violation: f64,
    /// `||G^T y - c||_inf`.
    pub dual_residual: f64,
    pub dual_bound: f64,
    /// `|h^T y - c^T z| / (1 + |c^T z|)`.
    pub relative_gap: f64,
    pub gap_bound: f64,
    /// `c^T z` recomputed from the data.
    pub objective: f64,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.primal_violation <= self.primal_bound
            && self.dual_sign_violation == 0.0
            && self.dual_residual <= self.dual_bound
            && self.relative_gap <= self.gap_bound
    }
}

/// Recomputes primal feasibility, dual feasibility and the duality gap of an
/// optimal solution from `problem` alone, without any solver state.
///
/// Returns `None` when the solution is not optimal or carries no multipliers.
pub fn verify_certificate(
    problem: &LpProblem,
    solution: &LpSolution,
    config: &SolverConfig,
) -> Option<CertificateReport> {
    if solution.status != LpStatus::Optimal {
        return None;
    }
    let z = solution.z.as_ref()?;
    let y = &solution.certificate.as_ref()?.y;
    check_point(problem, z, y, config)
}

pub(super) fn check_point(
    problem: &LpProblem,
    z: &DVector<f64>,
    y: &DVector<f64>,
    config: &SolverConfig,
) -> Option<CertificateReport> {
    let nv = problem.num_vars;
    let rows = problem.num_rows();
    if z.len() != nv || y.len() != rows {
        return None;
    }
    let g = &problem.constraint_matrix;
    let h = &problem.constraint_rhs;
    let c = &problem.objective;

    // Plain loops over the row-major data keep this path independent of the
    // solver's linear algebra.
    let mut primal_violation = 0.0f64;
    let mut h_dot_y = 0.0;
    let mut dual = vec![0.0; nv];
    for i in 0..rows {
        let row = &g[i * nv..(i + 1) * nv];
        let gz: f64 = row.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
        primal_violation = primal_violation.max(gz - h[i]);
        h_dot_y += h[i] * y[i];
        for (d, a) in dual.iter_mut().zip(row) {
            *d += a * y[i];
        }
    }
    let dual_residual = dual
        .iter()
        .zip(c)
        .map(|(d, ci)| (d - ci).abs())
        .fold(0.0, f64::max);
    let objective: f64 = c.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
    let dual_sign_violation = y.iter().fold(0.0f64, |acc, v| acc.max(-v));

    let h_inf = h.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let c_inf = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Some(CertificateReport {
        primal_violation,
        primal_bound: config.tol_feas * (1.0 + h_inf),
        dual_sign_violation,
        dual_residual,
        dual_bound: config.tol_feas * (1.0 + c_inf),
        relative_gap: (h_dot_y - objective).abs() / (1.0 + objective.abs()),
        gap_bound: config.tol_gap,
        objective,
    })
}
