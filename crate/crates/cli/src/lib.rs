//! Command-line front end for `kgflow`: configuration, commands and the
//! CSV/JSON file formats they produce.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use args::{Cli, Command};
use config::RunConfig;
use error::{CliError, CliResult};

pub const THREADS_ENV: &str = "KGFLOW_THREADS";

pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(THREADS_ENV, format!("expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(THREADS_ENV, e.to_string()))
}

pub fn run(cli: Cli) -> CliResult<()> {
    let base = match cli.command.config_path() {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = base.overlay(cli.command.overlay());
    match &cli.command {
        Command::Solve(_) => commands::solve(&cfg),
        Command::Scan(_) => commands::scan(&cfg),
        Command::Field(_) => commands::field(&cfg),
        Command::Traj(_) => commands::traj(&cfg),
        Command::BoostCheck(_) => commands::boost_check(&cfg),
        Command::FindV(_) => commands::find_v(&cfg),
    }
}
