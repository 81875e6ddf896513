use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hdbool::{run, Command, Format, RunOptions};

/// Thresholds, finite-dimension exponents and simulations of high-dimensional Poisson Boolean models.
#[derive(Parser)]
#[command(name = "hdbool", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (default: one per core).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Degree, percolation and volume-fraction thresholds with certificates.
    Thresholds(Common),
    /// Exact finite-n quantities and exponents over a list of dimensions.
    Scan(Common),
    /// Seeded Monte Carlo estimate of coverage or Palm degree.
    Mc {
        #[command(flatten)]
        common: Common,
        /// Overrides mc.seed from the config.
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
    },
    /// Poisson branching-process percolation probe.
    Branching(Common),
    /// Closed-form Gaussian-grain constants and the truncated-grain comparison.
    GaussianReport(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, seed) = match cli.command {
        Cmd::Thresholds(c) => (Command::Thresholds, c, None),
        Cmd::Scan(c) => (Command::Scan, c, None),
        Cmd::Mc { common, seed } => (Command::Mc, common, seed),
        Cmd::Branching(c) => (Command::Branching, c, None),
        Cmd::GaussianReport(c) => (Command::GaussianReport, c, None),
    };
    let opts = RunOptions {
        config: common.config,
        out: common.out,
        format: common.format,
        jobs: common.jobs,
        seed,
    };
    match run(command, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hdbool: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
