use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by grid construction, evaluators and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("margin violation: {0}")]
    MarginViolation(String),

    #[error("invalid grid values: {0}")]
    InvalidValues(String),

    #[error("derivative order {order} exceeds the supported maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("ball radius {radius} is below the floor {floor} (two grid spacings)")]
    RadiusTooSmall { radius: f64, floor: f64 },

    #[error("empty radius grid: cutoff {rho} is below the radius floor {floor}")]
    EmptyRadiusGrid { rho: f64, floor: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A parameter tuple lies outside the hypotheses of the inequality it names.
    #[error("infeasible case `{case}`: {reason}")]
    Infeasible { case: String, reason: String },

    #[error("malformed grid dump {path}: {reason}")]
    Dump { path: PathBuf, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
