//! The preconditioned system `A x = c` with `A = I - T`.

use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone)]
pub struct SplittingSystem {
    a: SparseMatrix,
    c: Vec<f64>,
}

impl SplittingSystem {
    pub fn new(a: SparseMatrix, c: Vec<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                what: "system matrix columns",
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        if c.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                what: "right-hand side",
                expected: a.nrows(),
                got: c.len(),
            });
        }
        if !all_finite(&c) || !all_finite(a.values()) {
            return Err(Error::invalid("system contains non-finite values"));
        }
        Ok(SplittingSystem { a, c })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.c
    }

    /// Returns a system with the same operator and a new right-hand side.
    pub fn with_rhs(&self, c: Vec<f64>) -> Result<Self> {
        Self::new(self.a.clone(), c)
    }

    /// `r_i = c_i - (A x)_i`.
    #[inline]
    pub fn residual_at(&self, i: usize, x: &[f64]) -> f64 {
        self.c[i] - self.a.row_dot(i, x)
    }

    /// [`residual_at`](Self::residual_at) reading `x_j` through a closure.
    #[inline]
    pub fn residual_at_by<F: FnMut(usize) -> f64>(&self, i: usize, x: F) -> f64 {
        self.c[i] - self.a.row_dot_by(i, x)
    }

    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        Ok((0..self.dim()).map(|i| self.residual_at(i, x)).collect())
    }

    pub fn residual_norm(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        Ok(norm2_iter((0..self.dim()).map(|i| self.residual_at(i, x))))
    }

    /// `y = T x = x - A x`; `T` is never stored.
    pub fn apply_t(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = x[i] - self.a.row_dot(i, x);
        }
    }

    pub fn has_unit_diagonal(&self) -> bool {
        self.a.diagonal().iter().all(|&d| d == 1.0)
    }

    pub fn require_unit_diagonal(&self) -> Result<()> {
        match self.a.diagonal().iter().position(|&d| d != 1.0) {
            None => Ok(()),
            Some(i) => Err(Error::Assumption(format!(
                "diagonal of A is not 1 in row {i} (Jacobi splitting expected)"
            ))),
        }
    }

    /// Checks `T = I - A >= 0` entrywise.
    pub fn require_nonnegative_splitting(&self) -> Result<()> {
        for (i, j, v) in self.a.triplets() {
            let t = if i == j { 1.0 - v } else { -v };
            if t < 0.0 {
                return Err(Error::Assumption(format!(
                    "T = I - A has negative entry {t} at ({i}, {j}); T >= 0 required"
                )));
            }
        }
        Ok(())
    }

    /// Entrywise `|I - alpha A|`.
    pub fn abs_iteration_matrix(&self, alpha: f64) -> Result<SparseMatrix> {
        Ok(self.a.identity_minus_scaled(alpha)?.abs())
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "iterate",
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Diagonal (Jacobi) preconditioning: `A = D^{-1} A_hat`, `c = D^{-1} b_hat`.
///
/// Rows are divided rather than multiplied by a reciprocal so that the
/// diagonal of `A` is exactly 1.
pub fn jacobi_split(a_hat: &SparseMatrix, b_hat: &[f64]) -> Result<SplittingSystem> {
    if !a_hat.is_square() {
        return Err(Error::DimensionMismatch {
            what: "matrix columns",
            expected: a_hat.nrows(),
            got: a_hat.ncols(),
        });
    }
    if b_hat.len() != a_hat.nrows() {
        return Err(Error::DimensionMismatch {
            what: "right-hand side",
            expected: a_hat.nrows(),
            got: b_hat.len(),
        });
    }
    let d = a_hat.diagonal();
    if let Some(row) = d.iter().position(|&v| v == 0.0) {
        return Err(Error::SingularPreconditioner { row });
    }
    let mut value = a_hat.values().to_vec();
    for i in 0..a_hat.nrows() {
        for v in &mut value[a_hat.row_start()[i]..a_hat.row_start()[i + 1]] {
            *v /= d[i];
        }
    }
    let a = SparseMatrix::from_csr(
        a_hat.nrows(),
        a_hat.ncols(),
        a_hat.row_start().to_vec(),
        a_hat.col_index().to_vec(),
        value,
    )?;
    let c = b_hat.iter().zip(&d).map(|(b, d)| b / d).collect();
    SplittingSystem::new(a, c)
}

pub fn norm2(x: &[f64]) -> f64 {
    norm2_iter(x.iter().copied())
}

fn norm2_iter(x: impl Iterator<Item = f64>) -> f64 {
    x.map(|v| v * v).sum::<f64>().sqrt()
}

/// `max_i |x_i / w_i|`.
pub fn norm_inf_weighted(x: &[f64], w: &[f64]) -> Result<f64> {
    if x.len() != w.len() {
        return Err(Error::DimensionMismatch {
            what: "weight vector",
            expected: x.len(),
            got: w.len(),
        });
    }
    if let Some(i) = w.iter().position(|&wi| !(wi > 0.0)) {
        return Err(Error::invalid(format!(
            "weight w[{i}] = {} is not positive",
            w[i]
        )));
    }
    Ok(x.iter()
        .zip(w)
        .map(|(xi, wi)| (xi / wi).abs())
        .fold(0.0, f64::max))
}

/// Right-hand side with entries uniform on (-0.5, 0.5) from a seeded SplitMix64.
pub fn uniform_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..n)
        .map(|_| loop {
            let v: f64 = rng.random::<f64>() - 0.5;
            if v != -0.5 {
                break v;
            }
        })
        .collect()
}

pub(crate) fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}
