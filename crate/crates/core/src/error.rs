use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic bytes: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: Vec<u8> },

    #[error("unsupported {format} version {version}")]
    UnsupportedVersion { format: &'static str, version: u8 },

    #[error("truncated payload: expected {expected} bytes, file ends at byte offset {offset}")]
    Truncated { expected: u64, offset: u64 },

    #[error("{trailing} trailing bytes after the last record (payload ends at byte offset {offset})")]
    TrailingBytes { trailing: u64, offset: u64 },

    #[error("corrupt record {index}: {reason}")]
    Corrupt { index: usize, reason: String },

    #[error("non-finite value in record {index}")]
    NonFinite { index: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("only one class present: {0}")]
    SingleClass(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line tool: 2 for data or
    /// validation problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Diverged(_) | Error::Numeric(_) => 3,
            _ => 2,
        }
    }
}
