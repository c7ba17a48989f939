use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("incoming and outgoing directions coincide: no scattering event")]
    NoDeflection,

    #[error("impact parameter {0} is outside (-1, 1): no collision")]
    NoCollision(f64),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("quadrature did not reach tolerance {tolerance:e}: estimated error {estimate:e}")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error("rejection sampler gave up after {iterations} proposals ({context})")]
    RejectionCap { iterations: usize, context: String },

    #[error("path chain too short: ends at T = {available}, needs {required} more")]
    ChainTooShort { available: f64, required: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("degenerate partition: {0}")]
    DegeneratePartition(String),

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
