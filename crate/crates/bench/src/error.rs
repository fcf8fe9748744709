use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] mixbo::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: malformed record: {message}")]
    Record { path: PathBuf, message: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(
        "{path}: fingerprint mismatch (record {found}, config {expected}); the config changed since this run was written"
    )]
    FingerprintMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("incomplete grid: {0}")]
    IncompleteGrid(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> BenchError {
    let path = path.into();
    move |source| BenchError::Io { path, source }
}
