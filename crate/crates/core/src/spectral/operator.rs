use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use crate::system::norm2;

use super::IterParams;

/// A square linear map applied matrix-free.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl<O: LinearOperator + ?Sized> LinearOperator for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row_dot(i, x);
        }
    }
}

/// Wraps a closure as an operator.
pub struct FnOperator<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnOperator { n, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

/// Entrywise absolute value of an iteration operator.
///
/// First order: `|I - alpha A|`. Second order: the doubled block operator
/// `[[|1+beta| |I - alpha A|, |beta| I], [I, 0]]` acting on `(x, x_prev)`.
#[derive(Debug, Clone)]
pub enum AbsOperator {
    FirstOrder {
        abs_t: SparseMatrix,
    },
    SecondOrder {
        abs_t: SparseMatrix,
        top_scale: f64,
        beta_abs: f64,
    },
}

impl AbsOperator {
    pub fn first_order(a: &SparseMatrix, alpha: f64) -> Result<Self> {
        check_finite(alpha, 0.0)?;
        Ok(AbsOperator::FirstOrder {
            abs_t: a.identity_minus_scaled(alpha)?.abs(),
        })
    }

    pub fn second_order(a: &SparseMatrix, alpha: f64, beta: f64) -> Result<Self> {
        check_finite(alpha, beta)?;
        Ok(AbsOperator::SecondOrder {
            abs_t: a.identity_minus_scaled(alpha)?.abs(),
            top_scale: (1.0 + beta).abs(),
            beta_abs: beta.abs(),
        })
    }

    /// The `|I - alpha A|` block.
    pub fn abs_t(&self) -> &SparseMatrix {
        match self {
            AbsOperator::FirstOrder { abs_t } | AbsOperator::SecondOrder { abs_t, .. } => abs_t,
        }
    }
}

/// Picks the first-order operator for `beta == 0`, the doubled one otherwise.
pub fn abs_operator(a: &SparseMatrix, params: &IterParams) -> Result<AbsOperator> {
    if params.beta == 0.0 {
        AbsOperator::first_order(a, params.alpha)
    } else {
        AbsOperator::second_order(a, params.alpha, params.beta)
    }
}

impl LinearOperator for AbsOperator {
    fn dim(&self) -> usize {
        match self {
            AbsOperator::FirstOrder { abs_t } => abs_t.nrows(),
            AbsOperator::SecondOrder { abs_t, .. } => 2 * abs_t.nrows(),
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            AbsOperator::FirstOrder { abs_t } => abs_t.apply(x, y),
            AbsOperator::SecondOrder {
                abs_t,
                top_scale,
                beta_abs,
            } => {
                let n = abs_t.nrows();
                let (cur, prev) = x.split_at(n);
                let (top, bottom) = y.split_at_mut(n);
                for i in 0..n {
                    top[i] = top_scale * abs_t.row_dot(i, cur) + beta_abs * prev[i];
                }
                bottom.copy_from_slice(cur);
            }
        }
    }
}

/// The signed doubled operator `[[(1+beta)(I - alpha A), -beta I], [I, 0]]`.
#[derive(Debug, Clone)]
pub struct DoubledOperator<'a> {
    a: &'a SparseMatrix,
    alpha: f64,
    beta: f64,
}

impl<'a> DoubledOperator<'a> {
    pub fn new(a: &'a SparseMatrix, alpha: f64, beta: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid("doubled operator needs a square matrix"));
        }
        check_finite(alpha, beta)?;
        Ok(DoubledOperator { a, alpha, beta })
    }
}

impl LinearOperator for DoubledOperator<'_> {
    fn dim(&self) -> usize {
        2 * self.a.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.a.nrows();
        let (cur, prev) = x.split_at(n);
        let (top, bottom) = y.split_at_mut(n);
        for i in 0..n {
            let t = cur[i] - self.alpha * self.a.row_dot(i, cur);
            top[i] = (1.0 + self.beta) * t - self.beta * prev[i];
        }
        bottom.copy_from_slice(cur);
    }
}

fn check_finite(alpha: f64, beta: f64) -> Result<()> {
    if alpha.is_finite() && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("alpha and beta must be finite"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const DEFAULT_POWER_TOL: f64 = 1e-10;

/// Spectral radius of a nonnegative operator by power iteration from the
/// all-ones vector.
///
/// Each step applies the operator twice and estimates `sqrt(|S^2 x| / |x|)`,
/// so a peripheral pair `{rho, -rho}` (bipartite sparsity, as in the
/// five-point Jacobi matrix) does not stall the estimate. Stops when the
/// relative change of the estimate falls below `tol`.
pub fn power_iteration_radius<O: LinearOperator + ?Sized>(
    op: &O,
    tol: f64,
    max_iters: usize,
) -> RadiusEstimate {
    let n = op.dim();
    if n == 0 {
        return RadiusEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut prev = f64::NAN;
    let mut est = f64::NAN;
    for it in 1..=max_iters {
        op.apply(&x, &mut y);
        op.apply(&y, &mut z);
        let nz = norm2(&z);
        if nz == 0.0 {
            return RadiusEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        if !nz.is_finite() {
            return RadiusEstimate {
                value: f64::NAN,
                iterations: it,
                converged: false,
            };
        }
        est = nz.sqrt();
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi = zi / nz;
        }
        if (est - prev).abs() <= tol * est {
            return RadiusEstimate {
                value: est,
                iterations: it,
                converged: true,
            };
        }
        prev = est;
    }
    RadiusEstimate {
        value: est,
        iterations: max_iters,
        converged: false,
    }
}

/// [`power_iteration_radius`] with the default tolerance and `100 n` steps.
pub fn spectral_radius<O: LinearOperator + ?Sized>(op: &O) -> RadiusEstimate {
    power_iteration_radius(op, DEFAULT_POWER_TOL, 100 * op.dim().max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{laplacian_2d, laplacian_jacobi_rho};
    use crate::system::jacobi_split;

    fn jacobi_laplacian(m: usize) -> SparseMatrix {
        let n = m * m;
        jacobi_split(&laplacian_2d(m).unwrap(), &vec![0.0; n])
            .unwrap()
            .matrix()
            .clone()
    }

    #[test]
    fn identity_radius_is_one() {
        let est = spectral_radius(&SparseMatrix::identity(3));
        assert!(est.converged);
        assert_eq!(est.value, 1.0);
    }

    #[test]
    fn jacobi_laplacian_radius() {
        let a = jacobi_laplacian(10);
        let t = AbsOperator::first_order(&a, 1.0).unwrap();
        let est = power_iteration_radius(&t, 1e-12, 100_000);
        assert!(est.converged);
        assert!(
            (est.value - laplacian_jacobi_rho(10)).abs() < 1e-6,
            "{est:?}"
        );
        assert!((laplacian_jacobi_rho(10) - 0.959493).abs() < 1e-6);
    }

    #[test]
    fn abs_first_order_at_alpha_one_is_t() {
        let a = jacobi_laplacian(4);
        let t = AbsOperator::first_order(&a, 1.0).unwrap();
        for (i, j, v) in t.abs_t().triplets() {
            let expected = if i == j { 0.0 } else { -a.get(i, j) };
            assert_eq!(v, expected);
        }
    }

    #[test]
    fn abs_scalar_alpha_two() {
        let a = SparseMatrix::identity(1);
        let t = AbsOperator::first_order(&a, 2.0).unwrap();
        assert_eq!(t.abs_t().get(0, 0), 1.0);
    }

    #[test]
    fn doubled_with_zero_beta_matches_first_order_block() {
        let a = jacobi_laplacian(3);
        let n = a.nrows();
        let first = AbsOperator::first_order(&a, 0.7).unwrap();
        let doubled = AbsOperator::second_order(&a, 0.7, 0.0).unwrap();
        assert_eq!(doubled.dim(), 2 * n);
        let x: Vec<f64> = (0..n).map(|i| i as f64 + 0.5).collect();
        let mut xx = x.clone();
        xx.extend(std::iter::repeat_n(0.0, n));
        let mut y = vec![0.0; n];
        let mut yy = vec![0.0; 2 * n];
        first.apply(&x, &mut y);
        doubled.apply(&xx, &mut yy);
        assert_eq!(&yy[..n], &y[..]);
        assert_eq!(&yy[n..], &x[..]);

        let r1 = power_iteration_radius(&doubled, 1e-12, 100_000).value;
        let r0 = power_iteration_radius(&first, 1e-12, 100_000).value;
        assert!((r1 - r0).abs() < 1e-9);
    }

    #[test]
    fn nilpotent_radius_is_zero() {
        let a = SparseMatrix::from_triplets(2, 2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(spectral_radius(&a).value, 0.0);
    }
}
