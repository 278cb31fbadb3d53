use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid data at row {row}: {message}")]
    Data { row: usize, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("insufficient history: need {needed} past samples, got {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("dataset schema error: missing required column \"{0}\"")]
    Schema(String),

    #[error("parse error at row {row}, column \"{column}\": {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("out of envelope: {0}")]
    Envelope(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("model document error: {0}")]
    Document(String),

    #[error("unsupported model document version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
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

    pub(crate) fn data(row: usize, message: impl Into<String>) -> Self {
        Error::Data {
            row,
            message: message.into(),
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// 1 usage/spec, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpec(_) | Error::Envelope(_) => 1,
            Error::Numerical(_) => 3,
            Error::Shape(_)
            | Error::Data { .. }
            | Error::InsufficientData(_)
            | Error::InsufficientHistory { .. }
            | Error::Schema(_)
            | Error::Parse { .. }
            | Error::UndefinedMetric(_)
            | Error::Document(_)
            | Error::Version { .. }
            | Error::Io { .. } => 2,
        }
    }
}
