//! The anchored sparse phase-retrieval LP in inequality form.
//!
//! The decision vector is `z = (x, t)` of length `2n`, and the program is
//!
//! ```text
//!     maximize   <phi, x> - lambda * sum_j t_j
//!     subject to  A x <= b,  -A x <= b,  x - t <= 0,  -x - t <= 0
//! ```
//!
//! so that `t_j = |x_j|` at any optimum with `lambda > 0`. Problems are kept as
//! maximizations throughout; the interior-point solver negates internally.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SpmError};
use crate::model::{AnchorVector, MeasurementSet};

/// The data of one instance: anchor, l1 weight and measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePhaseMaxSpec {
    phi: DVector<f64>,
    lambda: f64,
    meas: MeasurementSet,
}

impl SparsePhaseMaxSpec {
    pub fn new(phi: DVector<f64>, lambda: f64, meas: MeasurementSet) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(invalid(format!("lambda={lambda} must be finite and nonnegative")));
        }
        if phi.len() != meas.n() {
            return Err(SpmError::DimensionMismatch(format!(
                "anchor has length {} but measurements have {} columns",
                phi.len(),
                meas.n()
            )));
        }
        if (phi.norm() - 1.0).abs() > 1e-10 {
            return Err(invalid(format!("anchor norm {} is not 1", phi.norm())));
        }
        Ok(Self { phi, lambda, meas })
    }

    pub fn from_anchor(anchor: &AnchorVector, lambda: f64, meas: MeasurementSet) -> Result<Self> {
        Self::new(anchor.phi().clone(), lambda, meas)
    }

    pub fn n(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self) -> &DVector<f64> {
        &self.phi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn measurements(&self) -> &MeasurementSet {
        &self.meas
    }
}

/// Role of a constraint row in [`LpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowLabel {
    UpperMeasurement,
    LowerMeasurement,
    TUpper,
    TLower,
}

/// `maximize c^T z subject to G z <= h`, dense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    /// Row-major, `rhs.len()` rows of `num_vars` entries.
    pub constraint_matrix: Vec<f64>,
    pub constraint_rhs: Vec<f64>,
    pub labels: Vec<RowLabel>,
}

impl LpProblem {
    /// Wraps a general LP; every row is labelled `UpperMeasurement`.
    pub fn new(objective: Vec<f64>, g: &DMatrix<f64>, h: Vec<f64>) -> Result<Self> {
        let p = Self {
            num_vars: objective.len(),
            objective,
            constraint_matrix: row_major(g),
            constraint_rhs: h,
            labels: vec![RowLabel::UpperMeasurement; g.nrows()],
        };
        p.validate()?;
        if g.ncols() != p.num_vars {
            return Err(SpmError::DimensionMismatch(format!(
                "G has {} columns for {} variables",
                g.ncols(),
                p.num_vars
            )));
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let rows = self.constraint_rhs.len();
        if self.num_vars == 0 {
            return Err(invalid("LP needs at least one variable"));
        }
        if self.objective.len() != self.num_vars
            || self.constraint_matrix.len() != rows * self.num_vars
            || self.labels.len() != rows
        {
            return Err(SpmError::DimensionMismatch(format!(
                "LP with {} vars: objective {}, matrix {}, rhs {}, labels {}",
                self.num_vars,
                self.objective.len(),
                self.constraint_matrix.len(),
                rows,
                self.labels.len()
            )));
        }
        let all_finite = self
            .objective
            .iter()
            .chain(&self.constraint_matrix)
            .chain(&self.constraint_rhs)
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(invalid("LP data must be finite"));
        }
        Ok(())
    }

    pub fn num_rows(&self) -> usize {
        self.constraint_rhs.len()
    }

    pub fn g(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.num_rows(), self.num_vars, &self.constraint_matrix)
    }

    pub fn h(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.constraint_rhs)
    }

    pub fn c(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.objective)
    }
}

fn row_major(g: &DMatrix<f64>) -> Vec<f64> {
    g.transpose().as_slice().to_vec()
}

/// Builds the LP. Rows are ordered: m upper measurement rows, m lower
/// measurement rows, n `x - t` rows, n `-x - t` rows.
pub fn formulate(spec: &SparsePhaseMaxSpec) -> LpProblem {
    let n = spec.n();
    let m = spec.meas.m();
    let a = spec.meas.rows();
    let b = spec.meas.magnitudes();
    let nv = 2 * n;
    let rows = 2 * m + 2 * n;

    let mut g = vec![0.0; rows * nv];
    let mut h = vec![0.0; rows];
    let mut labels = Vec::with_capacity(rows);
    for i in 0..m {
        for j in 0..n {
            g[i * nv + j] = a[(i, j)];
            g[(m + i) * nv + j] = -a[(i, j)];
        }
        h[i] = b[i];
        h[m + i] = b[i];
    }
    labels.extend(std::iter::repeat_n(RowLabel::UpperMeasurement, m));
    labels.extend(std::iter::repeat_n(RowLabel::LowerMeasurement, m));
    for j in 0..n {
        let up = 2 * m + j;
        let lo = 2 * m + n + j;
        g[up * nv + j] = 1.0;
        g[up * nv + n + j] = -1.0;
        g[lo * nv + j] = -1.0;
        g[lo * nv + n + j] = -1.0;
    }
    labels.extend(std::iter::repeat_n(RowLabel::TUpper, n));
    labels.extend(std::iter::repeat_n(RowLabel::TLower, n));

    let mut objective = spec.phi.as_slice().to_vec();
    objective.extend(std::iter::repeat_n(-spec.lambda, n));

    LpProblem {
        num_vars: nv,
        objective,
        constraint_matrix: g,
        constraint_rhs: h,
        labels,
    }
}

/// Lifts `x` to the epigraph point `(x, |x|)`.
pub fn lift(x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    DVector::from_iterator(2 * n, x.iter().copied().chain(x.iter().map(|v| v.abs())))
}

/// `<phi, x> - lambda * ||x||_1`.
pub fn objective_value(spec: &SparsePhaseMaxSpec, x: &DVector<f64>) -> f64 {
    spec.phi.dot(x) - spec.lambda * x.lp_norm(1)
}

/// True iff `|<a_i, x>| <= b_i + tol` for every measurement.
pub fn is_feasible(spec: &SparsePhaseMaxSpec, x: &DVector<f64>, tol: f64) -> bool {
    let ax = spec.meas.rows() * x;
    ax.iter()
        .zip(spec.meas.magnitudes().iter())
        .all(|(v, b)| v.abs() <= b + tol)
}
