use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside the domain of an operation (negative FOV, odd pixel count, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed catalog line. Line numbers are 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Direction behind the camera plane.
    #[error("direction is behind the camera (z = {0})")]
    BehindCamera(f64),

    /// A caller broke a documented precondition, e.g. asked for correctness
    /// without ground truth.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Corrupt or incompatible binary container.
    #[error("invalid database file: {0}")]
    Format(String),

    /// A prebuilt database does not match the requested parameters.
    #[error("database fingerprint mismatch: {0}")]
    Fingerprint(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code for the command-line front end: 2 for anything
    /// that came from reading or writing files, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Parse { .. } | Error::Format(_) | Error::Json(_) => 2,
            _ => 1,
        }
    }
}
