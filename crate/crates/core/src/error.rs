use thiserror::Error;

use crate::quadrature::QuadratureError;

/// Errors produced by the partition and Lévy calculus.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("n = {n} is outside the enumerable range 1..={ceiling}")]
    EnumerationBounds { n: usize, ceiling: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),

    #[error("V-table covers n <= {available}, but n = {requested} was requested")]
    TableTooSmall { requested: usize, available: usize },

    #[error("model `{0}` has no evaluable density for the total mass")]
    MissingDensity(String),

    #[error("Laplace exponent is not finite at lambda = {0}")]
    InfiniteExponent(f64),

    #[error("{what}: deviation {deviation:e} exceeds tolerance {tolerance:e}")]
    ToleranceExceeded {
        what: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("negative predictive probability {value:e} at n = {n}, k = {k}")]
    NegativePredictive { n: usize, k: usize, value: f64 },

    #[error("malformed V-table document: {0}")]
    TableFormat(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
