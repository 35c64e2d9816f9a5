//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by simulation, spectral, and estimation routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Matrix operands do not have compatible shapes.
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    /// A component has zero realized variance, so its correlation row is undefined.
    #[error("component {index} has zero realized variance; correlation is undefined")]
    DegenerateComponent { index: usize },

    /// Refused to materialize a dense d-by-d matrix above the configured cap.
    #[error("cross-section dimension {d} exceeds the dense-matrix cap {cap}")]
    DimensionCap { d: usize, cap: usize },

    /// A spectrum is too short for the requested estimator.
    #[error("spectrum of padded length {len} is too short: {context} needs at least {needed}")]
    SpectrumTooShort {
        context: &'static str,
        len: usize,
        needed: usize,
    },

    /// Too many Monte Carlo replications failed.
    #[error("{failed} of {total} replications failed (more than 1% tolerated)")]
    TooManyFailures { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
