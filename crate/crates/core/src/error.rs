use thiserror::Error;

use crate::domain::Timestamp;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid auction event: {0}")]
    InvalidEvent(String),

    #[error("out-of-order timestamp for {entity}: {timestamp} < last update {last_update}")]
    OutOfOrder {
        entity: String,
        timestamp: Timestamp,
        last_update: Timestamp,
    },

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("log line {line}: {message}")]
    Log { line: usize, message: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
