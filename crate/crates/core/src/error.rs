use thiserror::Error;

/// Errors raised by argument validation and I/O across the crate.
///
/// Solver outcomes such as unboundedness are not errors; they are reported
/// through [`crate::solver::LpStatus`].
#[derive(Debug, Error)]
pub enum SpmError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("instance too large for exhaustive enumeration: {vars} variables, {rows} rows (limit {max_vars} x {max_rows})")]
    InstanceTooLarge {
        vars: usize,
        rows: usize,
        max_vars: usize,
        max_rows: usize,
    },

    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("unknown sweep axis `{0}` (expected one of m, k, alpha, lambda, n)")]
    UnknownAxis(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, SpmError>;

pub(crate) fn invalid(msg: impl Into<String>) -> SpmError {
    SpmError::InvalidArgument(msg.into())
}
