use thiserror::Error;

/// Failure of a CLI command, carrying the process exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    /// Errors raised while reading inputs; the code follows the error kind.
    #[error(transparent)]
    Input(#[from] mvhc_core::Error),
    /// Errors raised by the clustering run itself.
    #[error("pipeline failed: {0}")]
    Pipeline(mvhc_core::Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        use mvhc_core::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Input(E::Degenerate(_)) => EXIT_DEGENERATE,
            CliError::Input(_) => EXIT_CONFIG,
            CliError::Pipeline(E::Degenerate(_)) => EXIT_DEGENERATE,
            CliError::Pipeline(E::Config(_) | E::Input(_)) => EXIT_CONFIG,
            CliError::Pipeline(_) => EXIT_RUNTIME,
            CliError::Output { .. } => EXIT_RUNTIME,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
