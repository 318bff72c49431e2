//! Mehrotra predictor-corrector on the inequality form.
//!
//! Internally the solver minimizes `q^T z` with `q = -c` over
//! `G z + s = h, s >= 0`. The dual is `G^T y = c, y >= 0`, so `y` doubles as
//! the optimality certificate for the original maximization. Each Newton
//! step reduces to the normal equations `G^T (Y/S) G dz = rhs`, which are
//! factored with a dense Cholesky decomposition.

use nalgebra::{DMatrix, DVector};

use super::certificate::check_point;
use super::{Certificate, LpSolution, LpStatus, SolverConfig};
use crate::formulation::{LpProblem, RowLabel};

const STEP_FRACTION: f64 = 0.99;
/// Relaxation applied to rows whose right-hand side is exactly zero and that
/// are not epigraph rows, so the interior of `|<a_i, x>| <= 0` is nonempty.
const ZERO_ROW_RELAXATION: f64 = 1e-10;

/// Constraint matrix stored row by row as (column, value) pairs.
struct SparseRows {
    rows: Vec<Vec<(usize, f64)>>,
    ncols: usize,
}

impl SparseRows {
    fn new(problem: &LpProblem) -> Self {
        let nv = problem.num_vars;
        let rows = problem
            .constraint_matrix
            .chunks_exact(nv)
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .collect()
            })
            .collect();
        Self { rows, ncols: nv }
    }

    fn mul(&self, z: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows
                .iter()
                .map(|row| row.iter().map(|(j, v)| v * z[*j]).sum::<f64>()),
        )
    }

    fn tr_mul(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.ncols);
        for (row, yi) in self.rows.iter().zip(y.iter()) {
            for (j, v) in row {
                out[*j] += v * yi;
            }
        }
        out
    }

    /// `G^T diag(d) G`.
    fn weighted_gram(&self, d: &DVector<f64>) -> DMatrix<f64> {
        let nv = self.ncols;
        let mut out = DMatrix::zeros(nv, nv);
        for (row, di) in self.rows.iter().zip(d.iter()) {
            for (p, &(a, va)) in row.iter().enumerate() {
                let w = di * va;
                for &(b, vb) in &row[p..] {
                    out[(b, a)] += w * vb;
                }
            }
        }
        // Lower triangle is filled; mirror it.
        for a in 0..nv {
            for b in (a + 1)..nv {
                out[(a, b)] = out[(b, a)];
            }
        }
        out
    }
}

struct Iterate {
    z: DVector<f64>,
    s: DVector<f64>,
    y: DVector<f64>,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Distance to the boundary: the largest step keeping `v + step * dv >= 0`
/// (infinite when no component decreases).
fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(x, d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

fn starting_point(problem: &LpProblem, g: &SparseRows, h: &DVector<f64>) -> Iterate {
    let floor = 1e-3 * (1.0 + inf_norm(h));
    let mut z = DVector::zeros(problem.num_vars);
    // Raise t so the epigraph rows start strictly inside.
    for (row, label) in g.rows.iter().zip(&problem.labels) {
        if matches!(label, RowLabel::TUpper | RowLabel::TLower) {
            // `x_j - t_j` and `-x_j - t_j`: t is the highest column with -1.
            let t_col = row.iter().filter(|(_, v)| *v == -1.0).map(|(j, _)| *j).max();
            if let Some(j) = t_col {
                z[j] = floor;
            }
        }
    }
    let s = (h - g.mul(&z)).map(|v| v.max(floor));
    let y = DVector::from_element(h.len(), 1.0);
    Iterate { z, s, y }
}

/// Solves `G^T D G dz = rhs` by Cholesky, retrying with a small diagonal
/// shift when the matrix is numerically indefinite.
fn solve_normal(mut normal: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = normal.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut shift = 0.0;
    for _ in 0..4 {
        if let Some(chol) = normal.clone().cholesky() {
            let dz = chol.solve(rhs);
            if dz.iter().all(|v| v.is_finite()) {
                return Some(dz);
            }
        }
        let next = if shift == 0.0 { 1e-14 * scale.max(1.0) } else { shift * 100.0 };
        for i in 0..normal.nrows() {
            normal[(i, i)] += next - shift;
        }
        shift = next;
    }
    None
}

struct Direction {
    dz: DVector<f64>,
    ds: DVector<f64>,
    dy: DVector<f64>,
}

/// Newton direction for residuals `r_p = G z + s - h`, `r_d = G^T y - c` and
/// complementarity target `r_c` (the system is `Y ds + S dy = -r_c`).
fn newton_direction(
    g: &SparseRows,
    normal: &DMatrix<f64>,
    it: &Iterate,
    r_p: &DVector<f64>,
    r_d: &DVector<f64>,
    r_c: &DVector<f64>,
) -> Option<Direction> {
    // dy = S^{-1}(-r_c + Y r_p) + D G dz,  ds = -r_p - G dz.
    let base = DVector::from_iterator(
        r_c.len(),
        (0..r_c.len()).map(|i| (-r_c[i] + it.y[i] * r_p[i]) / it.s[i]),
    );
    let rhs = -r_d - g.tr_mul(&base);
    let dz = solve_normal(normal.clone(), &rhs)?;
    let g_dz = g.mul(&dz);
    let ds = -r_p - &g_dz;
    let dy = DVector::from_iterator(
        r_c.len(),
        (0..r_c.len()).map(|i| base[i] + it.y[i] / it.s[i] * g_dz[i]),
    );
    Some(Direction { dz, ds, dy })
}

/// Checks whether `dir`, scaled to unit infinity norm, is an improving ray.
fn ray_candidate(
    g: &SparseRows,
    c: &DVector<f64>,
    dir: &DVector<f64>,
    config: &SolverConfig,
) -> Option<DVector<f64>> {
    let norm = inf_norm(dir);
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    let r = dir / norm;
    let gr = g.mul(&r);
    let tol = config.tol_feas;
    if gr.iter().all(|v| *v <= tol) && c.dot(&r) > tol * (1.0 + inf_norm(c)) {
        Some(r)
    } else {
        None
    }
}

fn optimal(
    g: &SparseRows,
    h: &DVector<f64>,
    it: Iterate,
    objective: f64,
    gap: f64,
    iterations: usize,
) -> LpSolution {
    let complementarity = (h - g.mul(&it.z)).dot(&it.y);
    LpSolution {
        status: LpStatus::Optimal,
        objective: Some(objective),
        z: Some(it.z),
        gap,
        iterations,
        certificate: Some(Certificate {
            y: it.y,
            complementarity,
        }),
        ray: None,
    }
}

/// Solves `maximize c^T z subject to G z <= h` with a primal-dual
/// interior-point method.
///
/// An `Optimal` result always carries dual multipliers that passed
/// [`super::verify_certificate`] against the unmodified problem. `Unbounded`
/// is reported only together with a ray `r` (unit infinity norm) satisfying
/// `G r <= tol_feas` and `c^T r > tol_feas (1 + ||c||_inf)`, found either as
/// the affine-scaling direction at a primal-feasible iterate or, once the
/// objective passes `unbounded_threshold`, as that direction or the iterate
/// itself. Everything else, including iteration-cap exhaustion and
/// infeasible problems, is `NumericalFailure`.
pub fn solve(problem: &LpProblem, config: &SolverConfig) -> LpSolution {
    if problem.validate().is_err() || config.validate().is_err() {
        return LpSolution::failure(f64::NAN, 0);
    }
    let g = SparseRows::new(problem);
    let c = problem.c();
    let h_orig = problem.h();
    let mut h = h_orig.clone();
    for (i, label) in problem.labels.iter().enumerate() {
        if h[i] == 0.0 && !matches!(label, RowLabel::TUpper | RowLabel::TLower) {
            h[i] = ZERO_ROW_RELAXATION;
        }
    }
    let rows = h.len() as f64;

    let mut it = starting_point(problem, &g, &h);
    let mut gap = f64::NAN;

    for iter in 0..config.max_iters {
        let r_p = g.mul(&it.z) + &it.s - &h;
        let r_d = g.tr_mul(&it.y) - &c;
        let mu = it.s.dot(&it.y) / rows;

        let objective = c.dot(&it.z);
        let report = check_point(problem, &it.z, &it.y, config);
        if let Some(rep) = &report {
            gap = rep.relative_gap;
            if rep.passed() {
                return optimal(&g, &h_orig, it, rep.objective, gap, iter);
            }
        }

        let d: DVector<f64> = it.y.component_div(&it.s);
        let normal = g.weighted_gram(&d);

        // Predictor.
        let r_c_aff = it.s.component_mul(&it.y);
        let Some(aff) = newton_direction(&g, &normal, &it, &r_p, &r_d, &r_c_aff) else {
            return LpSolution::failure(gap, iter);
        };

        // A primal-feasible iterate plus an improving ray proves unboundedness,
        // whatever the objective magnitude.
        let primal_feasible = report.as_ref().is_some_and(|r| r.primal_violation <= r.primal_bound);
        if primal_feasible {
            if let Some(r) = ray_candidate(&g, &c, &aff.dz, config) {
                return LpSolution::unbounded(r, gap, iter);
            }
        }
        if objective.abs() > config.unbounded_threshold {
            let ray = ray_candidate(&g, &c, &aff.dz, config)
                .or_else(|| ray_candidate(&g, &c, &it.z, config));
            return match ray {
                Some(r) => LpSolution::unbounded(r, gap, iter),
                None => LpSolution::failure(gap, iter),
            };
        }

        let alpha_p = max_step(&it.s, &aff.ds).min(1.0);
        let alpha_d = max_step(&it.y, &aff.dy).min(1.0);
        let mu_aff = (&it.s + &aff.ds * alpha_p).dot(&(&it.y + &aff.dy * alpha_d)) / rows;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let r_c = DVector::from_iterator(
            it.s.len(),
            (0..it.s.len()).map(|i| it.s[i] * it.y[i] + aff.ds[i] * aff.dy[i] - sigma * mu),
        );
        let Some(dir) = newton_direction(&g, &normal, &it, &r_p, &r_d, &r_c) else {
            return LpSolution::failure(gap, iter);
        };

        let alpha_p = (STEP_FRACTION * max_step(&it.s, &dir.ds)).min(1.0);
        let alpha_d = (STEP_FRACTION * max_step(&it.y, &dir.dy)).min(1.0);
        it.z += &dir.dz * alpha_p;
        it.s += &dir.ds * alpha_p;
        it.y += &dir.dy * alpha_d;

        if !(it.z.iter().chain(it.s.iter()).chain(it.y.iter()).all(|v| v.is_finite())) {
            return LpSolution::failure(gap, iter + 1);
        }
    }

    // One last look after the final step.
    if let Some(rep) = check_point(problem, &it.z, &it.y, config) {
        gap = rep.relative_gap;
        if rep.passed() {
            return optimal(&g, &h_orig, it, rep.objective, gap, config.max_iters);
        }
    }
    LpSolution::failure(gap, config.max_iters)
}
