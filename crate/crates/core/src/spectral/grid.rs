use std::io::Write;

use crate::error::{Error, Result};

use super::params::{
    second_order_async_radius, second_order_sync_radius, IterParams, SpectrumBounds,
    DEFAULT_SPECTRUM_SAMPLES,
};

/// Synchronous and asynchronous second-order radii over a uniform
/// `(alpha, beta)` grid for the model spectrum `[1 - rho, 1 + rho]`.
///
/// Rows are indexed by beta, columns by alpha. An async entry is NaN where
/// `alpha <= 0` (undefined).
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    pub alpha_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub radius_sync: Vec<Vec<f64>>,
    pub radius_async: Vec<Vec<f64>>,
    pub rho: f64,
}

pub fn contour_grid(
    alpha_range: (f64, f64),
    beta_range: (f64, f64),
    rho: f64,
    resolution: usize,
) -> Result<SpectralGrid> {
    contour_grid_with_samples(
        alpha_range,
        beta_range,
        rho,
        resolution,
        DEFAULT_SPECTRUM_SAMPLES,
    )
}

pub fn contour_grid_with_samples(
    alpha_range: (f64, f64),
    beta_range: (f64, f64),
    rho: f64,
    resolution: usize,
    samples: usize,
) -> Result<SpectralGrid> {
    if resolution < 2 {
        return Err(Error::invalid("grid resolution must be at least 2"));
    }
    let bounds = SpectrumBounds::from_rho(rho)?;
    let alpha_values = linspace(alpha_range, resolution)?;
    let beta_values = linspace(beta_range, resolution)?;

    let mut radius_sync = Vec::with_capacity(resolution);
    let mut radius_async = Vec::with_capacity(resolution);
    for &beta in &beta_values {
        let mut sync_row = Vec::with_capacity(resolution);
        let mut async_row = Vec::with_capacity(resolution);
        for &alpha in &alpha_values {
            let params = IterParams::second_order(alpha, beta);
            sync_row.push(second_order_sync_radius(&params, bounds, samples)?);
            async_row.push(second_order_async_radius(&params, rho).unwrap_or(f64::NAN));
        }
        radius_sync.push(sync_row);
        radius_async.push(async_row);
    }
    Ok(SpectralGrid {
        alpha_values,
        beta_values,
        radius_sync,
        radius_async,
        rho,
    })
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::invalid(format!("bad range [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|k| if k + 1 == n { hi } else { lo + k as f64 * step })
        .collect())
}

impl SpectralGrid {
    /// `(alpha, beta, radius)` at the smallest synchronous radius.
    pub fn argmin_sync(&self) -> (f64, f64, f64) {
        let mut best = (f64::NAN, f64::NAN, f64::INFINITY);
        for (bi, row) in self.radius_sync.iter().enumerate() {
            for (ai, &r) in row.iter().enumerate() {
                if r < best.2 {
                    best = (self.alpha_values[ai], self.beta_values[bi], r);
                }
            }
        }
        best
    }

    /// Iterates `(alpha, beta, radius_sync, radius_async)` row-major in beta.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.beta_values
            .iter()
            .enumerate()
            .flat_map(move |(bi, &beta)| {
                self.alpha_values
                    .iter()
                    .enumerate()
                    .map(move |(ai, &alpha)| {
                        (
                            alpha,
                            beta,
                            self.radius_sync[bi][ai],
                            self.radius_async[bi][ai],
                        )
                    })
            })
    }

    /// CSV with header `alpha,beta,radius_sync,radius_async`; an undefined
    /// async radius is written as an empty field.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["alpha", "beta", "radius_sync", "radius_async"])?;
        for (alpha, beta, rs, ra) in self.points() {
            let ra = if ra.is_nan() {
                String::new()
            } else {
                ra.to_string()
            };
            w.write_record([alpha.to_string(), beta.to_string(), rs.to_string(), ra])?;
        }
        w.flush()?;
        Ok(())
    }
}
