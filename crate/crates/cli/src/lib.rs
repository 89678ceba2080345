//! Command-line front end: configuration, file formats and the
//! `preprocess`, `cluster`, `benchmark` and `metrics` commands.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 degenerate
//! data, 4 runtime failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use commands::{cmd_benchmark, cmd_cluster, cmd_metrics, cmd_preprocess, Report};
pub use config::{MethodSpec, RunConfig};
pub use error::{CliError, CliResult};
