use thiserror::Error;

use crate::dynamics::BlowUpReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid sizing error: {0}")]
    Sizing(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("operator not defined here: {0}")]
    InvalidOperator(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),

    #[error("solution blew up at t = {} (step {}): {}", .0.time, .0.step, .0.reason)]
    BlowUp(Box<BlowUpReport>),

    #[error("checkpoint truncated at byte {0}")]
    Truncated(u64),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
