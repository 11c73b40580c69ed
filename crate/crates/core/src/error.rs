use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid sizes, names or shapes supplied by the caller.
    #[error("configuration error: {0}")]
    Config(String),
    /// An operation was invoked on data that violates its precondition.
    #[error("logic error: {0}")]
    Logic(String),
    #[error("run {run} (seed {seed}) failed: {source}")]
    Run {
        run: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("invalid config file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn logic(msg: impl Into<String>) -> Self {
        Error::Logic(msg.into())
    }

    /// True for errors caused by bad input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config(_) | Error::Json(_) => true,
            Error::Run { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
