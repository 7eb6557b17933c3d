//! Synchronous, asynchronous and simulated first- and second-order
//! Richardson iterations for preconditioned sparse systems `A x = c`,
//! `A = I - T`, together with the spectral theory that predicts where the
//! asynchronous variants are guaranteed to converge.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod mtx;
pub mod runtime;
pub mod sim;
pub mod sparse;
pub mod spectral;
pub mod sync;
pub mod system;

pub use error::{Error, Result};
pub use sparse::{laplacian_2d, laplacian_jacobi_rho, SparseMatrix};
pub use spectral::{IterParams, OptimalParams, SpectrumBounds};
pub use system::{jacobi_split, norm2, norm_inf_weighted, uniform_rhs, SplittingSystem};
