mod commands;
mod config;
mod error;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::EXIT_USAGE;

/// Synchronous, asynchronous and simulated Richardson iterations on
/// preconditioned sparse systems.
#[derive(Debug, Parser)]
#[command(name = "richardson", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectral radius, optimal parameters and asynchronous guarantees.
    Spectra(commands::spectra::SpectraArgs),
    /// Synchronous and asynchronous radii over an (alpha, beta) grid.
    Contour(commands::contour::ContourArgs),
    /// Repeated multithreaded runs with residual, range and failure statistics.
    Experiment(commands::experiment::ExperimentArgs),
    /// Deterministic asynchronous simulation with explicit delays.
    Simulate(commands::simulate::SimulateArgs),
    /// One synchronous solve with a residual trace.
    Solve(commands::solve::SolveArgs),
    /// Write the five-point Laplacian in Matrix Market format.
    Generate(commands::generate::GenerateArgs),
    /// Recompute derived columns of experiment CSV files.
    Validate(commands::validate::ValidateArgs),
}

/// Problem selection shared by several commands.
#[derive(Debug, Clone, Args)]
pub struct ProblemFlags {
    /// Grid size of the m x m five-point Laplacian.
    #[arg(long)]
    pub m: Option<usize>,
    /// Seed of the uniform(-0.5, 0.5) right-hand side.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Iteration parameters shared by several commands.
#[derive(Debug, Clone, Args)]
pub struct ParamFlags {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "optimal_beta")]
    pub beta: Option<f64>,
    /// Use the optimal (alpha, beta) for the spectrum [1 - rho, 1 + rho].
    #[arg(long)]
    pub optimal_beta: bool,
}

impl ParamFlags {
    pub fn beta_setting(&self) -> Option<String> {
        if self.optimal_beta {
            Some("optimal".into())
        } else {
            self.beta.map(|b| b.to_string())
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutFlag {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match cli.command {
        Command::Spectra(a) => commands::spectra::run(a),
        Command::Contour(a) => commands::contour::run(a),
        Command::Experiment(a) => commands::experiment::run(a),
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Solve(a) => commands::solve::run(a),
        Command::Generate(a) => commands::generate::run(a),
        Command::Validate(a) => commands::validate::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
