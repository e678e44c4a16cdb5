use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("Fock truncation insufficient: {0}")]
    Truncation(String),

    #[error("integration failed at t = {t:.6e} s: {reason} (trace drift {trace_drift:.3e})")]
    Integration {
        t: f64,
        reason: String,
        trace_drift: f64,
    },

    #[error("fit did not converge: {0}")]
    Convergence(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data error in {path}: {reason}")]
    Data { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter { .. } => 2,
            Error::Truncation(_)
            | Error::Integration { .. }
            | Error::Convergence(_)
            | Error::InvalidState(_)
            | Error::DimensionMismatch { .. } => 3,
            Error::Data { .. } | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        }
    }
}
