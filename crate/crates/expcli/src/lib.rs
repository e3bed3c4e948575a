//! Configuration-driven experiment runner for the sparse SYK lab.
//!
//! Every experiment kind lives behind the [`registry::Experiment`] trait and
//! is registered by name; the CLI exposes one subcommand per registered
//! kind. A run is fully determined by `(config, seed)`: tasks draw from
//! per-task RNG streams and results are merged by task id, so reruns are
//! byte-identical in the CSV body regardless of worker count or
//! interruption/resume history.

pub mod config;
pub mod experiments;
pub mod registry;
pub mod runner;

use thiserror::Error;

/// Runner errors carrying the process exit code contract:
/// 2 = validation, 3 = capability, 1 = everything else.
#[derive(Debug, Error)]
pub enum ExpError {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Other(String),
}

impl ExpError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Validation(_) => 2,
            ExpError::Capability(_) => 3,
            _ => 1,
        }
    }

    pub fn validation(path: &str, reason: impl std::fmt::Display) -> Self {
        ExpError::Validation(format!("{path}: {reason}"))
    }
}

impl From<syklab_core::CoreError> for ExpError {
    fn from(err: syklab_core::CoreError) -> Self {
        match err {
            syklab_core::CoreError::Capability(msg) => ExpError::Capability(msg),
            other => ExpError::Validation(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for ExpError {
    fn from(err: serde_json::Error) -> Self {
        ExpError::Other(format!("json: {err}"))
    }
}
