//! `altgame`: generate game instances, solve them, and run seeded experiment suites.

mod experiment;
mod gen;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::experiment::ExperimentArgs;
use crate::gen::GenArgs;
use crate::solve::SolveArgs;

#[derive(Parser)]
#[command(
    name = "altgame",
    version,
    about = "Values of alternating quantum and distribution games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded instance files.
    Gen(GenArgs),
    /// Solve one instance file and print a JSON report.
    Solve(SolveArgs),
    /// Run a seeded experiment suite and emit CSV.
    Experiment(ExperimentArgs),
}

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Thresholds not met; output was still written.
    Threshold,
    Convergence(String),
    Io(String),
    Parse(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Threshold | Failure::Other(_) => 1,
            Failure::Convergence(_) => 2,
            Failure::Io(_) => 3,
            Failure::Parse(_) => 4,
        }
    }

    fn message(&self) -> Option<&str> {
        match self {
            Failure::Threshold => None,
            Failure::Convergence(m) | Failure::Io(m) | Failure::Parse(m) | Failure::Other(m) => Some(m),
        }
    }
}

impl From<altgame_core::Error> for Failure {
    fn from(e: altgame_core::Error) -> Self {
        match e {
            altgame_core::Error::Convergence { .. } => Failure::Convergence(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// Writes `text` to `out`, or to stdout when `out` is `None`.
pub fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            }
            std::fs::write(path, text).map_err(|e| io_error(path, e))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(args) => gen::run(&args),
        Command::Solve(args) => solve::run(&args),
        Command::Experiment(args) => experiment::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(m) = f.message() {
                eprintln!("error: {m}");
            }
            ExitCode::from(f.code())
        }
    }
}
