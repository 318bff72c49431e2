//! Brute-force oracle: enumerate every basic solution and every extreme ray.
//!
//! For a pointed polyhedron `{z : G z <= h}` (G of full column rank) the LP
//! is unbounded iff it is feasible and some extreme ray of the recession cone
//! `{r : G r <= 0}` improves the objective; otherwise the optimum is attained
//! at a vertex. Extreme rays are the one-dimensional null spaces of
//! `num_vars - 1` linearly independent rows, vertices the solutions of
//! `num_vars` independent rows.

use nalgebra::{DMatrix, DVector};

use super::{LpSolution, LpStatus};
use crate::error::{Result, SpmError};
use crate::formulation::LpProblem;

pub const EXHAUSTIVE_MAX_VARS: usize = 8;
pub const EXHAUSTIVE_MAX_ROWS: usize = 24;

/// Relative threshold on singular values below which a subsystem is skipped.
const RANK_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;

/// Calls `f` with every size-`r` subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        f(&idx);
        // Advance the rightmost index that still has room.
        let Some(pos) = (0..r).rev().find(|&p| idx[p] < n - r + p) else {
            return;
        };
        idx[pos] += 1;
        for q in pos + 1..r {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

fn inf_norm<'a>(v: impl IntoIterator<Item = &'a f64>) -> f64 {
    v.into_iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Null-space direction of a `(nv - 1) x nv` system of full row rank.
fn null_direction(sub: &DMatrix<f64>, nv: usize) -> Option<DVector<f64>> {
    if nv == 1 {
        return Some(DVector::from_element(1, 1.0));
    }
    let mut square = DMatrix::zeros(nv, nv);
    square.rows_mut(0, nv - 1).copy_from(sub);
    let svd = square.svd(false, true);
    let v_t = svd.v_t?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_by(|a, b| sv[*a].total_cmp(&sv[*b]));
    let largest = sv[order[nv - 1]];
    if !(largest > 0.0) || sv[order[1]] <= RANK_TOL * largest {
        return None;
    }
    let r = v_t.row(order[0]).transpose();
    Some(&r / inf_norm(r.iter()))
}

/// Exhaustive vertex / extreme-ray enumeration.
///
/// Returns `Optimal` with the best feasible vertex, `Unbounded` with an
/// improving extreme ray, or `NumericalFailure` when the instance is
/// inconclusive (no feasible vertex found, e.g. infeasible or not pointed).
/// No dual multipliers are produced. `iterations` counts the subsystems
/// examined.
pub fn solve_exhaustive(problem: &LpProblem) -> Result<LpSolution> {
    problem.validate()?;
    let nv = problem.num_vars;
    let rows = problem.num_rows();
    if nv > EXHAUSTIVE_MAX_VARS || rows > EXHAUSTIVE_MAX_ROWS {
        return Err(SpmError::InstanceTooLarge {
            vars: nv,
            rows,
            max_vars: EXHAUSTIVE_MAX_VARS,
            max_rows: EXHAUSTIVE_MAX_ROWS,
        });
    }
    let g = problem.g();
    let h = problem.h();
    let c = problem.c();
    let h_inf = inf_norm(h.iter());
    let g_inf = inf_norm(g.iter());
    let mut examined = 0usize;

    let mut best: Option<(f64, DVector<f64>)> = None;
    for_each_subset(rows, nv, |subset| {
        examined += 1;
        let sub = g.select_rows(subset);
        let rhs = DVector::from_iterator(nv, subset.iter().map(|&i| h[i]));
        let svd = sub.svd(true, true);
        let sv = &svd.singular_values;
        let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        if !(hi > 0.0) || lo <= RANK_TOL * hi {
            return;
        }
        let Ok(z) = svd.solve(&rhs, 0.0) else {
            return;
        };
        let tol = FEAS_TOL * (1.0 + h_inf + g_inf * inf_norm(z.iter()));
        let feasible = (&g * &z - &h).iter().all(|v| *v <= tol);
        if feasible {
            let value = c.dot(&z);
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, z));
            }
        }
    });

    let Some((objective, z)) = best else {
        return Ok(LpSolution::failure(f64::NAN, examined));
    };

    let mut ray: Option<DVector<f64>> = None;
    for_each_subset(rows, nv - 1, |subset| {
        if ray.is_some() {
            return;
        }
        examined += 1;
        let Some(r) = null_direction(&g.select_rows(subset), nv) else {
            return;
        };
        for cand in [r.clone(), -r] {
            let recedes = (&g * &cand).iter().all(|v| *v <= FEAS_TOL);
            if recedes && c.dot(&cand) > FEAS_TOL {
                ray = Some(cand);
                return;
            }
        }
    });

    if let Some(r) = ray {
        return Ok(LpSolution::unbounded(r, f64::NAN, examined));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        z: Some(z),
        objective: Some(objective),
        gap: 0.0,
        iterations: examined,
        certificate: None,
        ray: None,
    })
}
