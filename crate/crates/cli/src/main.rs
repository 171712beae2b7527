mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::commands::Outcome;
use crate::config::{Common, Format};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "sqcc", version, about = "Key-rate sweeps, photon budgets, bounds and oracle checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (default: the config's `out`, else stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for the parallel searches.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize every (variant, alpha, loss) point.
    Sweep,
    /// Minimum mean photon number over a grid of rate and BER targets.
    PhotonBudget,
    /// Compare the analytic models with the truncated Fock simulation.
    OracleCheck,
    /// Repeaterless and finite-energy rate bounds over a loss grid.
    Bounds,
}

fn run_with<T, F>(cli: &Cli, f: F) -> Result<(), CliError>
where
    T: DeserializeOwned + Common,
    F: FnOnce(&T) -> Result<Outcome, CliError>,
{
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let cfg: T = config::load(path)?;
    let format = cli.format.or(cfg.format()).unwrap_or_default();
    let out = cli.out.as_deref().or(cfg.out());
    let outcome = f(&cfg)?;
    output::write(&outcome.table.render(format)?, out)?;
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    }
    match cli.command {
        Command::Sweep => run_with(cli, commands::sweep),
        Command::PhotonBudget => run_with(cli, commands::photon_budget),
        Command::OracleCheck => run_with(cli, commands::oracle_check),
        Command::Bounds => run_with(cli, commands::bounds),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
