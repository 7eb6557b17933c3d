//! Shared fixtures for the benchmarks.

use richardson_core::{jacobi_split, laplacian_2d, uniform_rhs, SplittingSystem};

/// Jacobi-split m x m Laplacian with the default right-hand side.
pub fn laplace(m: usize) -> SplittingSystem {
    jacobi_split(&laplacian_2d(m).unwrap(), &uniform_rhs(m * m, 0)).unwrap()
}
