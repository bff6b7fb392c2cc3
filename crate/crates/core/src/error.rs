use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PaprError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested evaluation is known to lose all precision.
    #[error("numerically unstable: {0}")]
    Unstable(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    NoConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    /// A peak-to-mean ratio was requested for data with zero mean power.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("corrupt capture {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },

    #[error("capture metadata {path}: {reason}")]
    Metadata { path: PathBuf, reason: String },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = PaprError> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(PaprError::Domain(msg.into()))
}
