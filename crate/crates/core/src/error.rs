use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A chain-rule quotient or matrix element hit a zero denominator.
    #[error("singular point in {context}: denominator `{expression}` vanishes")]
    SingularPoint {
        context: &'static str,
        expression: &'static str,
    },

    #[error("no convergence after {iterations} iterations: {what}")]
    Convergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the CLI: 1 for bad input, 2 for numerical failure.
    /// Divergence is not an error and maps to 3 at the command level.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Parse { .. } | Error::Json(_) | Error::Io { .. } => 1,
            Error::NotFound(_) => 1,
            Error::SingularPoint { .. } | Error::Convergence { .. } | Error::Numeric(_) => 2,
        }
    }
}
