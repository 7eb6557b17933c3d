use clap::Args;
use richardson_core::spectral::contour_grid;

use crate::error::{usage, CliResult};
use crate::problem::output;
use crate::OutFlag;

#[derive(Debug, Args)]
pub struct ContourArgs {
    #[arg(long)]
    rho: f64,
    /// Alpha interval `lo:hi`.
    #[arg(long, default_value = "0:2", allow_hyphen_values = true)]
    alpha_range: String,
    /// Beta interval `lo:hi`.
    #[arg(long, default_value = "-1:1", allow_hyphen_values = true)]
    beta_range: String,
    /// Points per axis.
    #[arg(long, default_value_t = 101)]
    resolution: usize,
    #[command(flatten)]
    out: OutFlag,
}

fn parse_range(s: &str, name: &str) -> CliResult<(f64, f64)> {
    let bad = || usage(format!("invalid {name} '{s}', expected lo:hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    ))
}

pub fn run(args: ContourArgs) -> CliResult<()> {
    let alpha = parse_range(&args.alpha_range, "alpha range")?;
    let beta = parse_range(&args.beta_range, "beta range")?;
    let grid = contour_grid(alpha, beta, args.rho, args.resolution)?;
    grid.write_csv(output(args.out.out.as_deref())?)?;
    let (a, b, r) = grid.argmin_sync();
    eprintln!("min sync radius {r} at alpha {a}, beta {b}");
    Ok(())
}
