use std::path::PathBuf;

use clap::Args;
use richardson_core::laplacian_2d;
use richardson_core::mtx::write_matrix_market;

use crate::error::CliResult;

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: GenerateArgs) -> CliResult<()> {
    let a = laplacian_2d(args.m)?;
    write_matrix_market(&a, &args.out)?;
    eprintln!(
        "wrote {} ({} rows, {} entries)",
        args.out.display(),
        a.nrows(),
        a.nnz()
    );
    Ok(())
}
