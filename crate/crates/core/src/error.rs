use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: no valid records ({skipped} malformed lines skipped)")]
    EmptyCorpus { path: PathBuf, skipped: usize },

    #[error("{path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid specification: {0}")]
    Spec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} {index} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("labeled decoding requires a corpus embedding")]
    MissingCorpusEmbedding,

    #[error("weighted training requires a DF table")]
    MissingDfTable,

    #[error("non-finite loss at epoch {epoch}, step {step}: {value}")]
    NonFinite { epoch: usize, step: usize, value: f64 },

    #[error("vocabulary hash mismatch: expected {expected}, found {found} in {context}")]
    VocabMismatch {
        expected: String,
        found: String,
        context: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code: 1 for I/O failures, 2 for everything that is a
    /// validation or precondition failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}
