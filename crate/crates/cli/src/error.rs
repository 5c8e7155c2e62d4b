use std::io;
use std::path::PathBuf;

use thiserror::Error;
use wumprep_core::MergeError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}: no line matches CLF, ECLF or combined layout")]
    NoParseableInput(PathBuf),
    #[error(transparent)]
    Merge(#[from] MergeError),
    #[error("inconsistent export bundle: {0}")]
    RefIntegrityViolation(String),
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Intermediate { path: PathBuf, line: u64, reason: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Merge(_) => 2,
            Error::Io { .. } | Error::Csv { .. } | Error::Json { .. } => 3,
            Error::NoParseableInput(_) | Error::Intermediate { .. } => 4,
            Error::RefIntegrityViolation(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
