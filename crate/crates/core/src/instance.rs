//! Problem-instance and solution files (JSON).
//!
//! An instance records the generation parameters and, optionally, the
//! explicit data. Missing arrays are regenerated from `seed`, so a file with
//! only the scalar fields is a complete, reproducible instance.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SpmError};
use crate::formulation::{formulate, LpProblem, SparsePhaseMaxSpec};
use crate::harness::LambdaMode;
use crate::model::{
    generate_measurements, generate_sparse_signal, make_anchor, MeasurementSet, SignalDistribution,
    SparseSignal,
};
use crate::rng::mix_seed;
use crate::solver::{LpSolution, LpStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInstance {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub alpha: f64,
    /// Resolved l1 weight.
    pub lambda: f64,
    pub seed: u64,
    /// `gaussian` or `signs`.
    pub dist: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<Vec<f64>>,
    /// Row-major, `m * n` entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitudes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
}

/// An instance with every array resolved.
#[derive(Debug, Clone)]
pub struct Materialized {
    pub signal: Option<SparseSignal>,
    pub spec: SparsePhaseMaxSpec,
}

impl Materialized {
    pub fn lp(&self) -> LpProblem {
        formulate(&self.spec)
    }
}

fn lambda_mode_name(mode: &LambdaMode) -> &'static str {
    match mode {
        LambdaMode::Midpoint => "midpoint",
        LambdaMode::Explicit(_) => "explicit",
    }
}

impl ProblemInstance {
    /// Generates signal, measurements and anchor from `seed` and embeds them.
    pub fn generate(
        n: usize,
        k: usize,
        m: usize,
        alpha: f64,
        lambda_mode: LambdaMode,
        dist: SignalDistribution,
        seed: u64,
    ) -> Result<Self> {
        let lambda = lambda_mode.resolve(alpha, k)?;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(invalid(format!("lambda={lambda} must be finite and nonnegative")));
        }
        let mut inst = Self {
            n,
            k,
            m,
            alpha,
            lambda,
            seed,
            dist: dist.name().to_string(),
            lambda_mode: Some(lambda_mode_name(&lambda_mode).to_string()),
            signal: None,
            rows: None,
            magnitudes: None,
            phi: None,
        };
        let mat = inst.materialize()?;
        let meas = mat.spec.measurements();
        inst.signal = mat.signal.as_ref().map(|s| s.values().as_slice().to_vec());
        inst.rows = Some(meas.rows().transpose().as_slice().to_vec());
        inst.magnitudes = Some(meas.magnitudes().as_slice().to_vec());
        inst.phi = Some(mat.spec.phi().as_slice().to_vec());
        Ok(inst)
    }

    fn distribution(&self) -> Result<SignalDistribution> {
        self.dist.parse()
    }

    /// Resolves missing arrays from `seed` (signal from `mix(seed, 1)`, rows
    /// from `mix(seed, 2)`, anchor from `mix(seed, 3)`) and validates shapes.
    pub fn materialize(&self) -> Result<Materialized> {
        let (n, k, m) = (self.n, self.k, self.m);
        if n < 1 || k < 1 || k > n || m < 1 {
            return Err(invalid(format!("need 1 <= k <= n and m >= 1 (n={n}, k={k}, m={m})")));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid(format!("alpha={} must lie in (0, 1]", self.alpha)));
        }
        let check_len = |name: &str, v: &[f64], want: usize| -> Result<()> {
            if v.len() != want {
                return Err(SpmError::DimensionMismatch(format!(
                    "{name} has {} entries, expected {want}",
                    v.len()
                )));
            }
            Ok(())
        };

        let signal = match &self.signal {
            Some(v) => {
                check_len("signal", v, n)?;
                Some(SparseSignal::from_dense(DVector::from_column_slice(v))?)
            }
            None if self.rows.is_some() && self.magnitudes.is_some() => None,
            None => Some(generate_sparse_signal(
                n,
                k,
                &self.distribution()?,
                mix_seed(self.seed, &[1]),
            )?),
        };

        let meas = match (&self.rows, &self.magnitudes, &signal) {
            (Some(rows), Some(mags), _) => {
                check_len("rows", rows, m * n)?;
                check_len("magnitudes", mags, m)?;
                MeasurementSet::from_parts(
                    DMatrix::from_row_slice(m, n, rows),
                    DVector::from_column_slice(mags),
                )?
            }
            (Some(rows), None, Some(x0)) => {
                check_len("rows", rows, m * n)?;
                MeasurementSet::from_rows(DMatrix::from_row_slice(m, n, rows), x0)?
            }
            (None, _, Some(x0)) => {
                let meas = generate_measurements(x0, m, mix_seed(self.seed, &[2]))?;
                if let Some(mags) = &self.magnitudes {
                    check_len("magnitudes", mags, m)?;
                    MeasurementSet::from_parts(meas.rows().clone(), DVector::from_column_slice(mags))?
                } else {
                    meas
                }
            }
            _ => return Err(invalid("rows and magnitudes need either each other or a signal")),
        };

        let phi = match (&self.phi, &signal) {
            (Some(p), _) => {
                check_len("phi", p, n)?;
                DVector::from_column_slice(p)
            }
            (None, Some(x0)) => make_anchor(x0, self.alpha, mix_seed(self.seed, &[3]))?
                .phi()
                .clone(),
            (None, None) => return Err(invalid("phi is required when no signal is given")),
        };

        let spec = SparsePhaseMaxSpec::new(phi, self.lambda, meas)?;
        Ok(Materialized { signal, spec })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Contents of a solution file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub status: LpStatus,
    pub x_hat: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub gap: Option<f64>,
    pub iterations: usize,
    /// Relative error up to sign against the embedded signal, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_error: Option<f64>,
}

impl SolutionFile {
    pub fn new(sol: &LpSolution, n: usize, truth: Option<&SparseSignal>) -> Self {
        let x_hat = sol.x_part(n);
        let rel_error = match (&x_hat, truth) {
            (Some(x), Some(x0)) if sol.status == LpStatus::Optimal => {
                let norm = x0.norm();
                Some(((x - x0.values()).norm() / norm).min((x + x0.values()).norm() / norm))
            }
            _ => None,
        };
        Self {
            status: sol.status,
            x_hat: x_hat.map(|x| x.as_slice().to_vec()),
            objective: sol.objective,
            gap: sol.gap.is_finite().then_some(sol.gap),
            iterations: sol.iterations,
            rel_error,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
