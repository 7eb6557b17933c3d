use crate::error::{Error, Result};

use super::operator::{power_iteration_radius, LinearOperator};

/// A positive vector with `T w <= rho_eps w` componentwise.
#[derive(Debug, Clone)]
pub struct PerronWeight {
    pub w: Vec<f64>,
    pub epsilon: f64,
    /// Certified value: `T w <= rho_eps w` holds in floating point.
    pub rho_eps: f64,
    /// Power-iteration estimate of `rho(T)` the certificate was measured against.
    pub rho: f64,
    /// Perturbation `delta` of `T + delta E` whose Perron vector was used.
    pub delta: f64,
}

const MAX_HALVINGS: usize = 60;

/// Constructs a weight vector for the weighted max-norm in which `T`
/// contracts by at most `rho(T) + epsilon`.
///
/// `T` must be entrywise nonnegative. The Perron vector of the positive
/// matrix `T + delta E` (`E` all ones) is approximated by shifted power
/// iteration, starting from `delta = epsilon / n` and halving `delta` until
/// `max_i (T w)_i / w_i <= rho(T) + epsilon`. The returned weight always
/// passes the componentwise check; otherwise this fails.
pub fn perron_weight<O: LinearOperator + ?Sized>(t: &O, epsilon: f64) -> Result<PerronWeight> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let n = t.dim();
    if n == 0 {
        return Err(Error::invalid("empty operator"));
    }
    let rho = power_iteration_radius(t, 1e-12, 100 * n + 10_000).value;
    if !rho.is_finite() {
        return Err(Error::CertificationFailed(
            "spectral radius estimate is not finite".into(),
        ));
    }
    let target = rho + epsilon;

    let mut w = vec![1.0; n];
    let mut tw = vec![0.0; n];
    let mut delta = epsilon / n as f64;
    let steps_per_delta = 100 * n + 10_000;
    for _ in 0..=MAX_HALVINGS {
        for _ in 0..steps_per_delta {
            t.apply(&w, &mut tw);
            if let Some(rho_eps) = certify(&w, &tw, target) {
                return Ok(PerronWeight {
                    w,
                    epsilon,
                    rho_eps,
                    rho,
                    delta,
                });
            }
            // w <- (T + delta E + I) w, normalized to max entry 1. The unit
            // shift keeps the Perron root strictly dominant.
            let sum: f64 = w.iter().sum();
            let mut max = 0.0f64;
            for (wi, twi) in w.iter_mut().zip(&tw) {
                *wi += twi + delta * sum;
                max = max.max(*wi);
            }
            if !(max > 0.0) || !max.is_finite() {
                return Err(Error::CertificationFailed(
                    "power iterate degenerated".into(),
                ));
            }
            for wi in &mut w {
                *wi /= max;
            }
        }
        delta *= 0.5;
    }
    Err(Error::CertificationFailed(format!(
        "no weight with T w <= {target} w found after {MAX_HALVINGS} halvings of delta"
    )))
}

/// Smallest `r` (up to a few ulps above the max ratio) with `tw <= r w`
/// in floating point, provided it does not exceed `target`.
fn certify(w: &[f64], tw: &[f64], target: f64) -> Option<f64> {
    let mut r = w
        .iter()
        .zip(tw)
        .map(|(wi, ti)| ti / wi)
        .fold(0.0f64, f64::max);
    for _ in 0..8 {
        if r > target {
            return None;
        }
        if w.iter().zip(tw).all(|(wi, ti)| r * wi - ti >= 0.0) {
            return Some(r);
        }
        r = next_up(r);
    }
    None
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::MIN_POSITIVE
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}
