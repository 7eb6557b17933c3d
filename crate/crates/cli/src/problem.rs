use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use richardson_core::spectral::{optimal_second_order, SpectrumBounds};
use richardson_core::{jacobi_split, laplacian_2d, uniform_rhs};
use richardson_core::{IterParams, SplittingSystem};

use crate::config::Settings;
use crate::error::{usage, CliError, CliResult};

/// Jacobi-split m x m Laplacian with a seeded uniform right-hand side.
pub fn laplace_system(m: usize, seed: u64) -> CliResult<SplittingSystem> {
    let a = laplacian_2d(m)?;
    Ok(jacobi_split(&a, &uniform_rhs(m * m, seed))?)
}

/// Parameters from `alpha` and `beta` settings. `beta = optimal` selects the
/// optimal pair for `[1 - rho, 1 + rho]`, keeping an explicit alpha.
pub fn resolve_params(settings: &Settings, rho: f64, default_beta: &str) -> CliResult<IterParams> {
    let alpha: Option<f64> = settings.get("alpha")?;
    let beta = settings.raw("beta").unwrap_or(default_beta);
    let params = if beta == "optimal" {
        let opt = optimal_second_order(SpectrumBounds::from_rho(rho)?);
        IterParams::second_order(alpha.unwrap_or(opt.alpha), opt.beta)
    } else {
        let beta: f64 = beta
            .parse()
            .map_err(|_| usage(format!("invalid value '{beta}' for key 'beta'")))?;
        IterParams::second_order(alpha.unwrap_or(1.0), beta)
    };
    params.validate()?;
    Ok(params)
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writer for `out`, or standard output.
pub fn output(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

/// `dir/stem.suffix.csv` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map_or("out".into(), |s| s.to_string_lossy());
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}
