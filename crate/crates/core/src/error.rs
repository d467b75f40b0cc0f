use std::time::Duration;

use thiserror::Error;

/// Errors produced by the encoders, detectors and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("corrupt grammar: {0}")]
    CorruptGrammar(String),

    /// An algorithm was asked to run with knobs it cannot accept.
    #[error("config error: {0}")]
    Config(String),

    #[error("ingestion error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Ingest { row: Option<usize>, message: String },

    #[error("timed out after {0:?}")]
    Timeout(Duration),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
