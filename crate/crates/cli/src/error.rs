use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    /// A config that parses but cannot drive the requested command.
    #[error("invalid config: {0}")]
    Invalid(String),
    /// The run stopped early; its partial outputs and summary were written.
    #[error("run aborted: {0}")]
    Aborted(String),
    #[error("flow classification is undetermined")]
    Undetermined,
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
    #[error("{0}")]
    Numerics(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Invalid(_) => 2,
            CliError::Aborted(_) => 3,
            CliError::Undetermined => 4,
            CliError::Output { .. } | CliError::Numerics(_) => 1,
        }
    }

    pub(crate) fn output(path: impl Into<PathBuf>, e: impl std::fmt::Display) -> Self {
        CliError::Output { path: path.into(), message: e.to_string() }
    }
}
