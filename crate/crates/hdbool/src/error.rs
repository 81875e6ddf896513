use std::io;

use thiserror::Error;

/// Failure of a CLI run, mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] hdbool_core::Error),
    #[error("output error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    /// 2 for configuration and validation failures, 3 for internal
    /// consistency failures, 1 for output errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(e) if e.is_internal() => 3,
            CliError::Model(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}
