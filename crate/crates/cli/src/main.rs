//! `affine-pa`: simulate affine preferential attachment networks, estimate
//! `delta`, run Monte Carlo studies and tabulate limiting degree laws.
//!
//! Exit codes: `0` success, `2` usage or validation error, `1` runtime error.

mod args;
mod commands;
mod config;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<affine_pa::Error> for CliError {
    fn from(err: affine_pa::Error) -> Self {
        let code = if err.is_validation() { 2 } else { 1 };
        Self { code, message: err.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self { code: 1, message: err.to_string() }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        Self { code: 1, message: err.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a, &argv),
        Command::Estimate(a) => commands::estimate(a, &argv),
        Command::Mc(a) => commands::mc(a, &argv),
        Command::Limit(a) => commands::limit(a, &argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
