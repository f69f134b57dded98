use std::path::PathBuf;

use thiserror::Error;

/// Errors of the experiment drivers.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("invalid config: {0}")]
    Invalid(String),

    #[error(transparent)]
    Solver(#[from] vns_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}

impl LabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LabError::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
