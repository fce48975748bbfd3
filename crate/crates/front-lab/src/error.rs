//! Error type and exit-code mapping for the CLI.
//!
//! Exit codes: 0 success, 2 invalid config, 3 numerical failure,
//! 4 inconclusive verdict. Sweep harnesses branch on the outcome class.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] front_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Core(front_core::Error::InvalidInput(_)) => 2,
            LabError::Core(front_core::Error::Inconclusive(_)) => 4,
            LabError::Inconclusive(_) => 4,
            // filesystem problems are lumped with numerical failures: the
            // run produced no usable artifact either way
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
