//! `phaseseg` command-line driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "phaseseg", version, about = "Phase segregation solvers: runs, sigma sweeps and stop-operator demos")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
pub struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps; defaults to the machine parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Seed for random initial profiles; overrides the config seeds.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the model assumptions and the box compatibility conditions.
    Check(Common),
    /// Single run for one sigma or the limit problem.
    Run(Common),
    /// Runs for every sigma of the list plus the limit run, and their comparison.
    Sweep(Common),
    /// Stop and play outputs for the configured piecewise-linear input.
    StopDemo(Common),
    /// Print the version.
    Version,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Solver(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(c) => commands::check(&c),
        Command::Run(c) => commands::run(&c),
        Command::Sweep(c) => commands::sweep(&c),
        Command::StopDemo(c) => commands::stop_demo(&c),
        Command::Version => {
            println!("phaseseg {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
