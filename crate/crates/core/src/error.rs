use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad parameters, configs, or arguments outside an operation's domain.
    #[error("validation error [{code}]: {message}")]
    Validation { code: &'static str, message: String },

    /// A numerical invariant (norm, trace, positivity, energy) was violated.
    #[error("numerical integrity error [{code}]: {message}")]
    Integrity { code: &'static str, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(code: &'static str, message: impl Into<String>) -> Self {
        Error::Validation {
            code,
            message: message.into(),
        }
    }

    pub fn integrity(code: &'static str, message: impl Into<String>) -> Self {
        Error::Integrity {
            code,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI: 1 validation, 2 integrity, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } => 1,
            Error::Integrity { .. } => 2,
            Error::Io { .. } => 3,
        }
    }

    /// Machine-readable code, e.g. `grid.not_pow2`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Validation { code, .. } | Error::Integrity { code, .. } => code,
            Error::Io { .. } => "io",
        }
    }
}
