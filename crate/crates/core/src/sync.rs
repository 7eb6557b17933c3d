//! Reference synchronous iterations.
//!
//! Every solver runs a fixed number of steps and records the residual
//! relative to the initial one, recomputed from scratch at each recorded
//! step.

use std::io::Write;

use crate::error::{Error, Result};
use crate::spectral::IterParams;
use crate::system::{all_finite, norm2, SplittingSystem};

/// `x + alpha r`.
#[inline(always)]
pub(crate) fn first_order_update(x: f64, r: f64, alpha: f64) -> f64 {
    x + alpha * r
}

/// `x + beta (x - x_prev) + (1 + beta) alpha r`.
#[inline(always)]
pub(crate) fn second_order_update(x: f64, x_prev: f64, r: f64, alpha: f64, beta: f64) -> f64 {
    x + beta * (x - x_prev) + (1.0 + beta) * alpha * r
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// Iteration numbers at which norms were recorded; starts with 0 and
    /// always ends with `iterations`.
    pub steps: Vec<usize>,
    /// `|c - A x^k| / |c - A x^0|`; the first entry is exactly 1.
    pub residual_norms: Vec<f64>,
    /// `|x^k - x*|` when a reference solution was supplied.
    pub error_norms: Option<Vec<f64>>,
    pub iterations: usize,
    pub final_x: Vec<f64>,
}

impl IterationTrace {
    pub fn final_residual(&self) -> f64 {
        *self.residual_norms.last().unwrap()
    }

    /// CSV `k,rel_resid[,error_norm]`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match &self.error_norms {
            Some(_) => w.write_record(["k", "rel_resid", "error_norm"])?,
            None => w.write_record(["k", "rel_resid"])?,
        }
        for (idx, (k, r)) in self.steps.iter().zip(&self.residual_norms).enumerate() {
            let mut rec = vec![k.to_string(), format!("{r:e}")];
            if let Some(e) = &self.error_norms {
                rec.push(format!("{:e}", e[idx]));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the synchronous solvers on one system with shared recording options.
#[derive(Debug, Clone)]
pub struct SyncSolver<'a> {
    sys: &'a SplittingSystem,
    stride: Option<usize>,
    reference: Option<&'a [f64]>,
}

impl<'a> SyncSolver<'a> {
    pub fn new(sys: &'a SplittingSystem) -> Self {
        SyncSolver {
            sys,
            stride: None,
            reference: None,
        }
    }

    /// Record every `stride` iterations. The default is 1 for runs of at
    /// most 1000 iterations and 10 beyond.
    pub fn stride(mut self, stride: usize) -> Self {
        self.stride = Some(stride.max(1));
        self
    }

    /// Also record `|x^k - x*|`.
    pub fn reference(mut self, x_star: &'a [f64]) -> Self {
        self.reference = Some(x_star);
        self
    }

    /// `x^{k+1} = T x^k + c`, computed as `x^k + r^k`.
    pub fn standard(&self, x0: &[f64], k_max: usize) -> Result<IterationTrace> {
        let mut rec = self.recorder(x0, k_max)?;
        let n = self.sys.dim();
        let mut x = x0.to_vec();
        let mut r = vec![0.0; n];
        for k in 1..=k_max {
            self.fill_residual(&x, &mut r);
            for (xi, ri) in x.iter_mut().zip(&r) {
                *xi += *ri;
            }
            rec.record(k, &x);
        }
        Ok(rec.finish(x))
    }

    /// `x^{k+1} = x^k + alpha_k r^k`; a schedule in `params` overrides `alpha`.
    pub fn first_order(
        &self,
        x0: &[f64],
        params: &IterParams,
        k_max: usize,
    ) -> Result<IterationTrace> {
        params.validate()?;
        let mut rec = self.recorder(x0, k_max)?;
        let n = self.sys.dim();
        let mut x = x0.to_vec();
        let mut r = vec![0.0; n];
        for k in 1..=k_max {
            let alpha = params.alpha_at(k - 1);
            self.fill_residual(&x, &mut r);
            for (xi, ri) in x.iter_mut().zip(&r) {
                *xi = first_order_update(*xi, *ri, alpha);
            }
            rec.record(k, &x);
        }
        Ok(rec.finish(x))
    }

    /// Three-term recurrence; `x^1` is one first-order step with the same alpha.
    pub fn second_order(
        &self,
        x0: &[f64],
        params: &IterParams,
        k_max: usize,
    ) -> Result<IterationTrace> {
        params.validate()?;
        let (alpha, beta) = (params.alpha, params.beta);
        let mut rec = self.recorder(x0, k_max)?;
        let n = self.sys.dim();
        let mut x = x0.to_vec();
        let mut x_prev = x0.to_vec();
        let mut r = vec![0.0; n];
        for k in 1..=k_max {
            self.fill_residual(&x, &mut r);
            if k == 1 {
                for (xi, ri) in x.iter_mut().zip(&r) {
                    *xi = first_order_update(*xi, *ri, alpha);
                }
            } else {
                for i in 0..n {
                    let next = second_order_update(x[i], x_prev[i], r[i], alpha, beta);
                    x_prev[i] = x[i];
                    x[i] = next;
                }
            }
            rec.record(k, &x);
        }
        Ok(rec.finish(x))
    }

    /// Forward Gauss-Seidel sweeps in index order.
    pub fn gauss_seidel(&self, x0: &[f64], k_max: usize) -> Result<IterationTrace> {
        self.damped_gauss_seidel(x0, 1.0, k_max)
    }

    /// In-place sweeps `x_i <- x_i + alpha r_i / a_ii` using current values.
    pub fn damped_gauss_seidel(
        &self,
        x0: &[f64],
        alpha: f64,
        k_max: usize,
    ) -> Result<IterationTrace> {
        let diag = self.sys.matrix().diagonal();
        if let Some(row) = diag.iter().position(|&d| d == 0.0) {
            return Err(Error::SingularPreconditioner { row });
        }
        let mut rec = self.recorder(x0, k_max)?;
        let mut x = x0.to_vec();
        for k in 1..=k_max {
            for i in 0..x.len() {
                let r = self.sys.residual_at(i, &x);
                x[i] = first_order_update(x[i], r / diag[i], alpha);
            }
            rec.record(k, &x);
        }
        Ok(rec.finish(x))
    }

    fn fill_residual(&self, x: &[f64], r: &mut [f64]) {
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = self.sys.residual_at(i, x);
        }
    }

    fn recorder(&self, x0: &[f64], k_max: usize) -> Result<Recorder<'a>> {
        let n = self.sys.dim();
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                what: "initial iterate",
                expected: n,
                got: x0.len(),
            });
        }
        if !all_finite(x0) {
            return Err(Error::invalid("initial iterate is not finite"));
        }
        if let Some(xs) = self.reference {
            if xs.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "reference solution",
                    expected: n,
                    got: xs.len(),
                });
            }
        }
        let stride = self.stride.unwrap_or(if k_max <= 1000 { 1 } else { 10 });
        let r0 = self.sys.residual_norm(x0)?;
        let mut rec = Recorder {
            sys: self.sys,
            reference: self.reference,
            stride,
            k_max,
            scale: if r0 > 0.0 { r0 } else { 1.0 },
            steps: vec![0],
            residual_norms: vec![1.0],
            error_norms: None,
        };
        rec.error_norms = self.reference.map(|xs| vec![distance(x0, xs)]);
        Ok(rec)
    }
}

struct Recorder<'a> {
    sys: &'a SplittingSystem,
    reference: Option<&'a [f64]>,
    stride: usize,
    k_max: usize,
    scale: f64,
    steps: Vec<usize>,
    residual_norms: Vec<f64>,
    error_norms: Option<Vec<f64>>,
}

impl Recorder<'_> {
    fn record(&mut self, k: usize, x: &[f64]) {
        if !k.is_multiple_of(self.stride) && k != self.k_max {
            return;
        }
        self.steps.push(k);
        let r = self.sys.residual_norm(x).expect("length checked");
        self.residual_norms.push(r / self.scale);
        if let (Some(errs), Some(xs)) = (&mut self.error_norms, self.reference) {
            errs.push(distance(x, xs));
        }
    }

    fn finish(self, final_x: Vec<f64>) -> IterationTrace {
        IterationTrace {
            steps: self.steps,
            residual_norms: self.residual_norms,
            error_norms: self.error_norms,
            iterations: self.k_max,
            final_x,
        }
    }
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    norm2(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>())
}

pub fn standard_iteration(
    sys: &SplittingSystem,
    x0: &[f64],
    k_max: usize,
) -> Result<IterationTrace> {
    SyncSolver::new(sys).standard(x0, k_max)
}

pub fn first_order(
    sys: &SplittingSystem,
    x0: &[f64],
    params: &IterParams,
    k_max: usize,
) -> Result<IterationTrace> {
    SyncSolver::new(sys).first_order(x0, params, k_max)
}

pub fn second_order(
    sys: &SplittingSystem,
    x0: &[f64],
    params: &IterParams,
    k_max: usize,
) -> Result<IterationTrace> {
    SyncSolver::new(sys).second_order(x0, params, k_max)
}

pub fn gauss_seidel(sys: &SplittingSystem, x0: &[f64], k_max: usize) -> Result<IterationTrace> {
    SyncSolver::new(sys).gauss_seidel(x0, k_max)
}

pub fn damped_gauss_seidel(
    sys: &SplittingSystem,
    x0: &[f64],
    alpha: f64,
    k_max: usize,
) -> Result<IterationTrace> {
    SyncSolver::new(sys).damped_gauss_seidel(x0, alpha, k_max)
}
