//! Library side of the `galileo` command: configuration, output files and
//! the subcommands, kept here so integration tests can reuse the readers.

use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod output;

/// Anything that stops a subcommand. Check failures are not errors; they
/// are reported through the exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Config(#[from] config::ConfigError),

    #[error("{context}: {source}")]
    Runtime { context: String, source: galileo_core::Error },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
}

impl CliError {
    /// 2 for usage and configuration problems, 3 for runtime aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Runtime { .. } | CliError::Io { .. } | CliError::Csv { .. } => 3,
        }
    }
}
