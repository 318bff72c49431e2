//! Seeded Monte Carlo recovery trials, sweeps and phase diagrams.
//!
//! Every trial is a pure function of its configuration and of the triple
//! `(master seed, cell index, trial index)`, so results do not depend on how
//! trials are scheduled across threads.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SpmError};
use crate::formulation::{formulate, objective_value, SparsePhaseMaxSpec};
use crate::model::{generate_measurements, generate_sparse_signal, make_anchor, SignalDistribution};
use crate::rng::{mix_seed, trial_seed};
use crate::solver::{solve, verify_certificate, LpStatus, SolverConfig};
use crate::theory::lambda_midpoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "value")]
pub enum LambdaMode {
    /// `0.625 alpha / sqrt k`, the middle of the admissible interval.
    Midpoint,
    Explicit(f64),
}

impl LambdaMode {
    pub fn resolve(&self, alpha: f64, k: usize) -> Result<f64> {
        match *self {
            LambdaMode::Midpoint => lambda_midpoint(alpha, k),
            LambdaMode::Explicit(v) => Ok(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub alpha: f64,
    pub lambda_mode: LambdaMode,
    pub dist: SignalDistribution,
    /// Relative recovery tolerance, up to global sign.
    pub success_tol: f64,
    pub solver: SolverConfig,
    pub seed: u64,
}

impl TrialConfig {
    /// Configuration with default distribution, tolerance and solver settings.
    pub fn new(n: usize, k: usize, m: usize, alpha: f64, seed: u64) -> Self {
        Self {
            n,
            k,
            m,
            alpha,
            lambda_mode: LambdaMode::Midpoint,
            dist: SignalDistribution::default(),
            success_tol: 1e-5,
            solver: SolverConfig::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.k < 1 || self.k > self.n {
            return Err(invalid(format!("need 1 <= k <= n (k={}, n={})", self.k, self.n)));
        }
        if self.m < 1 {
            return Err(invalid("m must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid(format!("alpha={} must lie in (0, 1]", self.alpha)));
        }
        if self.alpha < 1.0 && self.n < 2 {
            return Err(invalid("alpha < 1 needs n >= 2"));
        }
        if let LambdaMode::Explicit(l) = self.lambda_mode {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(invalid(format!("lambda={l} must be finite and nonnegative")));
            }
        }
        if !(self.success_tol > 0.0) {
            return Err(invalid("success_tol must be positive"));
        }
        self.solver.validate()
    }

    pub fn lambda(&self) -> Result<f64> {
        self.lambda_mode.resolve(self.alpha, self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub config: TrialConfig,
    pub cell_index: usize,
    pub trial_index: usize,
    /// Seed derived from `(config.seed, cell_index, trial_index)`.
    pub seed: u64,
    pub lambda: f64,
    pub status: LpStatus,
    /// `min(||x_hat - x0||, ||x_hat + x0||) / ||x0||`; present iff optimal.
    pub rel_error: Option<f64>,
    pub rel_error_plus: Option<f64>,
    pub rel_error_minus: Option<f64>,
    pub success: bool,
    /// `objective(x_hat) - objective(x0)`; present iff optimal.
    pub objective_gap_vs_truth: Option<f64>,
    /// Independent KKT re-check of the solve; present iff optimal.
    pub certificate_ok: Option<bool>,
    pub iterations: usize,
    pub wall_time: f64,
}

/// Runs trial `trial_index` of cell 0.
pub fn run_trial(config: &TrialConfig, trial_index: usize) -> Result<TrialRecord> {
    run_trial_in_cell(config, 0, trial_index)
}

/// Generates signal, measurements and anchor from the derived seed, solves
/// the LP and scores the answer against the ground truth.
pub fn run_trial_in_cell(
    config: &TrialConfig,
    cell_index: usize,
    trial_index: usize,
) -> Result<TrialRecord> {
    config.validate()?;
    let start = Instant::now();
    let seed = trial_seed(config.seed, cell_index as u64, trial_index as u64);
    let lambda = config.lambda()?;

    let x0 = generate_sparse_signal(config.n, config.k, &config.dist, mix_seed(seed, &[1]))?;
    let meas = generate_measurements(&x0, config.m, mix_seed(seed, &[2]))?;
    let anchor = make_anchor(&x0, config.alpha, mix_seed(seed, &[3]))?;
    let spec = SparsePhaseMaxSpec::from_anchor(&anchor, lambda, meas)?;
    let lp = formulate(&spec);
    let sol = solve(&lp, &config.solver);

    let mut record = TrialRecord {
        config: config.clone(),
        cell_index,
        trial_index,
        seed,
        lambda,
        status: sol.status,
        rel_error: None,
        rel_error_plus: None,
        rel_error_minus: None,
        success: false,
        objective_gap_vs_truth: None,
        certificate_ok: None,
        iterations: sol.iterations,
        wall_time: 0.0,
    };
    if let Some(x_hat) = sol.x_part(config.n) {
        let norm = x0.norm();
        let plus = (&x_hat - x0.values()).norm() / norm;
        let minus = (&x_hat + x0.values()).norm() / norm;
        let rel = plus.min(minus);
        record.rel_error = Some(rel);
        record.rel_error_plus = Some(plus);
        record.rel_error_minus = Some(minus);
        record.success = rel <= config.success_tol;
        record.objective_gap_vs_truth =
            Some(objective_value(&spec, &x_hat) - objective_value(&spec, x0.values()));
        record.certificate_ok =
            verify_certificate(&lp, &sol, &config.solver).map(|rep| rep.passed());
    }
    record.wall_time = start.elapsed().as_secs_f64();
    Ok(record)
}

/// Parameters that sweeps and diagrams can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    M,
    K,
    Alpha,
    Lambda,
    N,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::M => "m",
            Axis::K => "k",
            Axis::Alpha => "alpha",
            Axis::Lambda => "lambda",
            Axis::N => "n",
        }
    }

    /// Returns `base` with this parameter set to `value`.
    pub fn apply(&self, base: &TrialConfig, value: f64) -> Result<TrialConfig> {
        let cfg = self.apply_unchecked(base, value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Like [`Axis::apply`] but defers validation, for intermediate configs
    /// that only become valid once a second axis is applied.
    fn apply_unchecked(&self, base: &TrialConfig, value: f64) -> Result<TrialConfig> {
        let mut cfg = base.clone();
        let count = || -> Result<usize> {
            if value.fract() != 0.0 || !(value >= 1.0) || !value.is_finite() {
                return Err(invalid(format!(
                    "axis {} needs positive integers, got {value}",
                    self.name()
                )));
            }
            Ok(value as usize)
        };
        match self {
            Axis::M => cfg.m = count()?,
            Axis::K => cfg.k = count()?,
            Axis::N => cfg.n = count()?,
            Axis::Alpha => cfg.alpha = value,
            Axis::Lambda => cfg.lambda_mode = LambdaMode::Explicit(value),
        }
        Ok(cfg)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = SpmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(Axis::M),
            "k" => Ok(Axis::K),
            "alpha" => Ok(Axis::Alpha),
            "lambda" => Ok(Axis::Lambda),
            "n" => Ok(Axis::N),
            other => Err(SpmError::UnknownAxis(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisGrid {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl AxisGrid {
    pub fn new(axis: Axis, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid(format!("grid for axis {axis} is empty")));
        }
        Ok(Self { axis, values })
    }
}

/// Aggregate over the trials of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub value1: f64,
    pub value2: Option<f64>,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean `rel_error` over optimal trials; `None` if no trial was optimal.
    pub mean_rel_error: Option<f64>,
}

fn summarize(value1: f64, value2: Option<f64>, records: &[TrialRecord]) -> CellSummary {
    let successes = records.iter().filter(|r| r.success).count();
    let errs: Vec<f64> = records.iter().filter_map(|r| r.rel_error).collect();
    CellSummary {
        value1,
        value2,
        trials: records.len(),
        successes,
        success_rate: successes as f64 / records.len() as f64,
        mean_rel_error: (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64),
    }
}

/// Runs `trials` trials for every config in `cells`, `jobs` at a time.
/// Output order is `(cell, trial)` regardless of scheduling.
fn run_cells(cells: &[TrialConfig], trials: usize, jobs: usize) -> Result<Vec<Vec<TrialRecord>>> {
    if trials < 1 {
        return Err(invalid("trials must be at least 1"));
    }
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..trials).map(move |t| (c, t)))
        .collect();
    let run = |&(c, t): &(usize, usize)| run_trial_in_cell(&cells[c], c, t);
    let flat: Vec<TrialRecord> = if jobs <= 1 {
        tasks.iter().map(run).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(run).collect::<Result<_>>())?
    };
    let mut out: Vec<Vec<TrialRecord>> = Vec::with_capacity(cells.len());
    let mut it = flat.into_iter();
    for _ in 0..cells.len() {
        out.push(it.by_ref().take(trials).collect());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: AxisGrid,
    pub trials_per_cell: usize,
    pub cells: Vec<CellSummary>,
    #[serde(skip)]
    pub records: Vec<Vec<TrialRecord>>,
}

/// Varies one parameter of `base` over `grid.values`.
pub fn run_sweep(base: &TrialConfig, grid: &AxisGrid, trials: usize, jobs: usize) -> Result<SweepResult> {
    let configs = grid
        .values
        .iter()
        .map(|&v| grid.axis.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    let records = run_cells(&configs, trials, jobs)?;
    let cells = grid
        .values
        .iter()
        .zip(&records)
        .map(|(&v, recs)| summarize(v, None, recs))
        .collect();
    Ok(SweepResult {
        grid: grid.clone(),
        trials_per_cell: trials,
        cells,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub axis1: AxisGrid,
    pub axis2: AxisGrid,
    pub trials_per_cell: usize,
    /// Row-major over `(axis1, axis2)`.
    pub cells: Vec<CellSummary>,
    #[serde(skip)]
    pub records: Vec<Vec<TrialRecord>>,
}

impl PhaseDiagram {
    pub fn cell(&self, i: usize, j: usize) -> &CellSummary {
        &self.cells[i * self.axis2.values.len() + j]
    }
}

/// Full factorial grid over two distinct parameters.
pub fn phase_diagram(
    base: &TrialConfig,
    axis1: &AxisGrid,
    axis2: &AxisGrid,
    trials: usize,
    jobs: usize,
) -> Result<PhaseDiagram> {
    if axis1.axis == axis2.axis {
        return Err(invalid(format!("diagram axes must differ (both {})", axis1.axis)));
    }
    let mut configs = Vec::with_capacity(axis1.values.len() * axis2.values.len());
    let mut coords = Vec::with_capacity(configs.capacity());
    for &v1 in &axis1.values {
        let partial = axis1.axis.apply_unchecked(base, v1)?;
        for &v2 in &axis2.values {
            configs.push(axis2.axis.apply(&partial, v2)?);
            coords.push((v1, v2));
        }
    }
    let records = run_cells(&configs, trials, jobs)?;
    let cells = coords
        .iter()
        .zip(&records)
        .map(|(&(v1, v2), recs)| summarize(v1, Some(v2), recs))
        .collect();
    Ok(PhaseDiagram {
        axis1: axis1.clone(),
        axis2: axis2.clone(),
        trials_per_cell: trials,
        cells,
        records,
    })
}

pub const TRIALS_CSV_HEADER: [&str; 9] = [
    "axis1",
    "axis2",
    "trial",
    "seed",
    "status",
    "rel_error",
    "success",
    "objective_gap",
    "wall_time",
];

pub const SUMMARY_CSV_HEADER: [&str; 6] = [
    "axis1",
    "axis2",
    "trials",
    "successes",
    "success_rate",
    "mean_rel_error",
];

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes one row per trial. `wall_time` is left empty unless
/// `include_timing`, because timings differ between otherwise identical runs.
pub fn write_trials_csv<W: Write>(
    out: W,
    cells: &[CellSummary],
    records: &[Vec<TrialRecord>],
    include_timing: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIALS_CSV_HEADER)?;
    for (cell, recs) in cells.iter().zip(records) {
        for r in recs {
            w.write_record([
                cell.value1.to_string(),
                opt_num(cell.value2),
                r.trial_index.to_string(),
                r.seed.to_string(),
                r.status.to_string(),
                opt_num(r.rel_error),
                r.success.to_string(),
                opt_num(r.objective_gap_vs_truth),
                if include_timing { r.wall_time.to_string() } else { String::new() },
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(out: W, cells: &[CellSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_CSV_HEADER)?;
    for c in cells {
        w.write_record([
            c.value1.to_string(),
            opt_num(c.value2),
            c.trials.to_string(),
            c.successes.to_string(),
            c.success_rate.to_string(),
            opt_num(c.mean_rel_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `trials.csv`, `summary.csv` and `<json_name>` into `dir`.
pub fn write_outputs<T: Serialize>(
    dir: &Path,
    cells: &[CellSummary],
    records: &[Vec<TrialRecord>],
    json_name: &str,
    json: &T,
    include_timing: bool,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_trials_csv(std::fs::File::create(dir.join("trials.csv"))?, cells, records, include_timing)?;
    write_summary_csv(std::fs::File::create(dir.join("summary.csv"))?, cells)?;
    let mut text = serde_json::to_string_pretty(json)?;
    text.push('\n');
    std::fs::write(dir.join(json_name), text)?;
    Ok(())
}
