use std::fs::File;
use std::path::{Path, PathBuf};

use clap::Args;
use richardson_core::runtime::{read_aggregate_csv, read_runs_csv, validate_report};

use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Aggregate CSV written by `experiment`.
    #[arg(long)]
    aggregate: PathBuf,
    /// Per-run CSV written next to it.
    #[arg(long)]
    runs: PathBuf,
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn run(args: ValidateArgs) -> CliResult<()> {
    let aggregates = read_aggregate_csv(open(&args.aggregate)?)?;
    let runs = read_runs_csv(open(&args.runs)?)?;
    let checked = validate_report(&aggregates, &runs)?;
    println!("ok: {} aggregate rows, {checked} runs", aggregates.len());
    Ok(())
}
