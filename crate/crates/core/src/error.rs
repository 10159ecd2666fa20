use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported combination: dimension {dimension} with {mechanism} resetting")]
    UnsupportedCombination { dimension: u8, mechanism: &'static str },

    #[error("quadrature did not converge after {evaluations} evaluations (error estimate {error_estimate:e})")]
    NonConvergence { evaluations: usize, error_estimate: f64 },

    #[error("objective is divergent at every probe in ({lo}, {hi})")]
    NoFiniteValue { lo: f64, hi: f64 },

    #[error("bracket ({lo}, {hi}) is empty")]
    BracketTooNarrow { lo: f64, hi: f64 },

    #[error("{fraction:.4} of replicates were censored at the reset cap")]
    ExcessiveCensoring { fraction: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects anything that is not a finite, strictly positive number.
pub(crate) fn require_positive<T: crate::Real>(name: &'static str, value: T) -> Result<()> {
    if value.is_finite() && value > T::zero() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
