//! `bakerspec`: spectra, fractal Weyl fits and classical trapped sets.
//!
//! Exit status is 0 on success, 2 for invalid configurations and 3 when
//! the eigensolver fails. `BAKERSPEC_THREADS` caps the worker pool.

mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use crate::commands::CliError;
use crate::config::{Cli, Command};

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("BAKERSPEC_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("BAKERSPEC_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the worker pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Spectrum(args) => commands::spectrum(args),
        Command::Weyl(args) => commands::weyl(args),
        Command::Classical(args) => commands::classical(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bakerspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
