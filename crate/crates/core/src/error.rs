use thiserror::Error;

/// Errors produced by the optimization toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("rejection sampling exhausted after {attempts} attempts (over-constrained space?)")]
    SamplingExhausted { attempts: usize },

    #[error("unknown constraint `{0}`")]
    UnknownConstraint(String),

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error("invalid task configuration: {0}")]
    InvalidTask(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid kernel configuration: {0}")]
    InvalidKernel(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("matrix not positive definite even with jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("incompatible configuration: {0}")]
    Incompatible(String),

    #[error("unsupported {kind} `{id}`")]
    Unsupported { kind: &'static str, id: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trust region is empty: {0}")]
    EmptyTrustRegion(String),

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("surrogate fit failed: {0}")]
    Fit(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
