use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter failed validation before any computation started.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A grid is empty, non-uniform, too coarse or too narrow.
    #[error("grid error: {0}")]
    Grid(String),
    /// A kernel or determinant hit a singular point.
    #[error("singularity: {0}")]
    Singular(String),
    /// A conversion or operation that is not available for this input.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A numerical run failed its own validation (norm drift, leakage, convergence).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {value}")))
    }
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {value}")))
    }
}
