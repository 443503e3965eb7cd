//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by parameter validation, bound evaluation, and estimation.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical or simulation parameter violates its documented range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// A bound was requested outside the region where it is defined.
    #[error("bound not defined here: {0}")]
    BoundUndefined(String),

    /// A Monte Carlo estimate landed outside its feasible range, so the
    /// derived quantity would be meaningless (usually a sampling artifact).
    #[error("estimate out of feasible range: {0}")]
    EstimateOutOfRange(String),

    /// Malformed or unreadable input (parameter file, field dump).
    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
