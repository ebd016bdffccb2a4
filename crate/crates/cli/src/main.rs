mod args;
mod commands;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

/// Failure classes, mapped one-to-one onto exit codes.
#[derive(Debug)]
pub enum CliError {
    /// A computation ran but did not meet its tolerance (exit 1).
    Verification(String),
    /// Bad flags, inputs or files (exit 2).
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Verification(m) | CliError::Usage(m) => f.write_str(m),
        }
    }
}

/// Rendered output plus whether the run passed its own checks.
pub struct Output {
    pub text: String,
    pub passed: bool,
}

const THREADS_VAR: &str = "CAVSIM_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_VAR} must be a non-negative integer, got `{raw}`")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("{THREADS_VAR}: {e}")))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Coeffs(a) => commands::coeffs(a, cli.format),
        Command::OracleVerify(a) => commands::oracle_verify(a, cli.format),
        Command::Gate(a) => commands::gate(a, cli.format),
        Command::Sweep(a) => commands::sweep(a, cli.format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| {
        match &cli.out {
            Some(path) => std::fs::write(path, &out.text)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?,
            None => print!("{}", out.text),
        }
        Ok(out.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                CliError::Verification(_) => ExitCode::from(1),
                CliError::Usage(_) => ExitCode::from(2),
            }
        }
    }
}
