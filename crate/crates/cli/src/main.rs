use std::process::ExitCode;

use clap::Parser;
use kgflow_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = kgflow_cli::configure_threads().and_then(|()| kgflow_cli::run(cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kgflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
