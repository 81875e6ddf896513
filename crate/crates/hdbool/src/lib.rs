//! Command-line front end for `hdbool-core`: reads a JSON run configuration,
//! runs one computation and writes CSV or JSON.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

pub use commands::run;
pub use error::CliError;

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Thresholds,
    Scan,
    Mc,
    Branching,
    GaussianReport,
}

/// Options shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub jobs: Option<usize>,
    /// Overrides `mc.seed`.
    pub seed: Option<u64>,
}
