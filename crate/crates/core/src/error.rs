use thiserror::Error;

/// Errors raised by the clustering engine.
#[derive(Debug, Error)]
pub enum Error {
    /// Unknown method/fuser ids, malformed graphs, bad parameter values.
    #[error("configuration error: {0}")]
    Config(String),
    /// Inputs that violate an operation's preconditions.
    #[error("input error: {0}")]
    Input(String),
    /// Data that became empty or otherwise unusable after a transformation.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
