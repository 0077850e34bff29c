use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Argument is valid but lies outside the region where the stated accuracy
    /// is guaranteed.
    #[error("accuracy not guaranteed: {0}")]
    AccuracyNotGuaranteed(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    /// Solver state left the finite range; `last_valid` is the index of the
    /// last node that was accepted.
    #[error("solver diverged after node {last_valid}: {reason}")]
    Divergence { last_valid: usize, reason: String },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
