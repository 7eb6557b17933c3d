use num_complex::Complex64;

use crate::error::{Error, Result};

/// Interval `[a, b]`, `0 < a <= b`, containing the spectrum of `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumBounds {
    a: f64,
    b: f64,
}

impl SpectrumBounds {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a <= b && b.is_finite()) {
            return Err(Error::invalid(format!(
                "spectrum bounds need 0 < a <= b, got a = {a}, b = {b}"
            )));
        }
        Ok(SpectrumBounds { a, b })
    }

    /// `[1 - rho, 1 + rho]`, the Jacobi-splitting bounds for `rho = rho(T)`.
    pub fn from_rho(rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::invalid(format!("rho must lie in [0, 1), got {rho}")));
        }
        Self::new(1.0 - rho, 1.0 + rho)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Per-step step lengths for the non-stationary first-order method; the
/// list is reused cyclically.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSchedule {
    values: Vec<f64>,
    alpha_bar: f64,
}

impl AlphaSchedule {
    /// Every entry must lie in `(0, alpha_bar]`.
    pub fn new(values: Vec<f64>, alpha_bar: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("alpha schedule is empty"));
        }
        if let Some(v) = values.iter().find(|&&v| !(v > 0.0 && v <= alpha_bar)) {
            return Err(Error::invalid(format!(
                "alpha schedule entry {v} outside (0, {alpha_bar}]"
            )));
        }
        Ok(AlphaSchedule { values, alpha_bar })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn alpha_bar(&self) -> f64 {
        self.alpha_bar
    }

    pub fn at(&self, k: usize) -> f64 {
        self.values[k % self.values.len()]
    }
}

/// Richardson parameters; `beta == 0` is the first-order method.
#[derive(Debug, Clone, PartialEq)]
pub struct IterParams {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_schedule: Option<AlphaSchedule>,
}

impl IterParams {
    pub fn first_order(alpha: f64) -> Self {
        IterParams {
            alpha,
            beta: 0.0,
            alpha_schedule: None,
        }
    }

    pub fn second_order(alpha: f64, beta: f64) -> Self {
        IterParams {
            alpha,
            beta,
            alpha_schedule: None,
        }
    }

    pub fn with_schedule(mut self, schedule: AlphaSchedule) -> Self {
        self.alpha_schedule = Some(schedule);
        self
    }

    /// Step length used in step `k` (0-based).
    pub fn alpha_at(&self, k: usize) -> f64 {
        match &self.alpha_schedule {
            Some(s) => s.at(k),
            None => self.alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::invalid("alpha and beta must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalParams {
    pub alpha: f64,
    pub beta: f64,
    /// Asymptotic convergence factor, `rho(T_{alpha,beta})`.
    pub q: f64,
}

impl OptimalParams {
    pub fn params(&self) -> IterParams {
        IterParams::second_order(self.alpha, self.beta)
    }
}

/// `2 / (a + b)`.
pub fn optimal_first_order_alpha(bounds: SpectrumBounds) -> f64 {
    2.0 / (bounds.a + bounds.b)
}

/// `max(|1 - alpha a|, |1 - alpha b|)`.
pub fn first_order_sync_radius(alpha: f64, bounds: SpectrumBounds) -> f64 {
    (1.0 - alpha * bounds.a)
        .abs()
        .max((1.0 - alpha * bounds.b).abs())
}

/// `|1 - alpha| + alpha rho`, an upper bound on `rho(|I - alpha A|)` for
/// `T >= 0`; it is below one exactly when `alpha < 2 / (1 + rho)`.
pub fn first_order_async_bound(alpha: f64, rho: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    Ok((1.0 - alpha).abs() + alpha * rho)
}

/// Frankel's parameters for spectrum in `[a, b]`.
pub fn optimal_second_order(bounds: SpectrumBounds) -> OptimalParams {
    if bounds.a == bounds.b {
        return OptimalParams {
            alpha: 1.0 / bounds.a,
            beta: 0.0,
            q: 0.0,
        };
    }
    let (sa, sb) = (bounds.a.sqrt(), bounds.b.sqrt());
    let q = (sb - sa) / (sb + sa);
    OptimalParams {
        alpha: 2.0 / (bounds.a + bounds.b),
        beta: q * q,
        q,
    }
}

/// Roots of `l^2 - (1+beta)(1 - alpha mu) l + beta = 0`.
pub fn quadratic_roots_sync(mu: f64, params: &IterParams) -> (Complex64, Complex64) {
    let p = (1.0 + params.beta) * (1.0 - params.alpha * mu);
    let beta = params.beta;
    let disc = p * p - 4.0 * beta;
    if disc >= 0.0 {
        let big = 0.5 * (p + p.signum() * disc.sqrt());
        let small = if big != 0.0 { beta / big } else { 0.0 };
        (Complex64::new(big, 0.0), Complex64::new(small, 0.0))
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(0.5 * p, im), Complex64::new(0.5 * p, -im))
    }
}

/// Largest root modulus of the synchronous quadratic at `mu`.
pub fn sync_root_modulus(mu: f64, alpha: f64, beta: f64) -> f64 {
    let p = (1.0 + beta) * (1.0 - alpha * mu);
    let disc = p * p - 4.0 * beta;
    if disc >= 0.0 {
        0.5 * (p.abs() + disc.sqrt())
    } else {
        beta.sqrt()
    }
}

/// Roots of `l^2 - |1+beta| mu l - |beta| = 0`, largest first. Both are
/// real; their product is `-|beta|`.
pub fn quadratic_roots_async(mu: f64, params: &IterParams) -> Result<(f64, f64)> {
    if !(mu >= 0.0) {
        return Err(Error::invalid(format!(
            "mu = {mu} must be a nonnegative eigenvalue of |I - alpha A|"
        )));
    }
    let large = async_root(mu, params.beta);
    let b = params.beta.abs();
    let small = if large > 0.0 { -b / large } else { 0.0 };
    Ok((large, small))
}

fn async_root(mu: f64, beta: f64) -> f64 {
    let s = (1.0 + beta).abs() * mu;
    0.5 * (s + (s * s + 4.0 * beta.abs()).sqrt())
}

/// Max of the synchronous root modulus over `samples` equispaced points
/// of `[a, b]`, endpoints included.
pub fn second_order_sync_radius(
    params: &IterParams,
    bounds: SpectrumBounds,
    samples: usize,
) -> Result<f64> {
    if samples < 2 {
        return Err(Error::invalid("need at least 2 spectrum samples"));
    }
    let step = (bounds.b - bounds.a) / (samples - 1) as f64;
    Ok((0..samples)
        .map(|k| {
            let mu = if k + 1 == samples {
                bounds.b
            } else {
                bounds.a + k as f64 * step
            };
            sync_root_modulus(mu, params.alpha, params.beta)
        })
        .fold(0.0, f64::max))
}

pub const DEFAULT_SPECTRUM_SAMPLES: usize = 1024;

/// `rho(|T_{alpha,beta}|)` when `T` has zero diagonal: the largest root of
/// the absolute quadratic at `mu = |1 - alpha| + alpha rho`.
pub fn second_order_async_radius(params: &IterParams, rho: f64) -> Result<f64> {
    let mu = first_order_async_bound(params.alpha, rho)?;
    Ok(async_root(mu, params.beta))
}

/// `alpha > 0` and `|1+beta| (|1-alpha| + alpha rho) + |beta| < 1`.
pub fn async_condition_holds(params: &IterParams, rho: f64) -> bool {
    let (alpha, beta) = (params.alpha, params.beta);
    alpha > 0.0 && (1.0 + beta).abs() * ((1.0 - alpha).abs() + alpha * rho) + beta.abs() < 1.0
}

/// Upper end of the guaranteed `beta` interval `[-1, (1-nu)/(1+nu))` with
/// `nu = |1-alpha| + alpha rho`, or `None` when `nu >= 1`.
pub fn beta_upper_bound(alpha: f64, rho: f64) -> Result<Option<f64>> {
    let nu = first_order_async_bound(alpha, rho)?;
    Ok((nu < 1.0).then(|| (1.0 - nu) / (1.0 + nu)))
}

/// `q^k (1 + k (1 - q^2) / (1 + q^2))`, the 2-norm error reduction bound
/// after `k` steps with optimal parameters.
pub fn error_bound_factor(q: f64, k: usize) -> f64 {
    let q2 = q * q;
    q.powi(k as i32) * (1.0 + k as f64 * (1.0 - q2) / (1.0 + q2))
}
