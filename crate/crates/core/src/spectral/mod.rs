//! Spectral radii, optimal parameters and convergence regions for the
//! first- and second-order Richardson iterations.

mod grid;
mod operator;
mod params;
mod perron;

pub use grid::{contour_grid, contour_grid_with_samples, SpectralGrid};
pub use operator::{
    abs_operator, power_iteration_radius, spectral_radius, AbsOperator, DoubledOperator,
    FnOperator, LinearOperator, RadiusEstimate, DEFAULT_POWER_TOL,
};
pub use params::{
    async_condition_holds, beta_upper_bound, error_bound_factor, first_order_async_bound,
    first_order_sync_radius, optimal_first_order_alpha, optimal_second_order,
    quadratic_roots_async, quadratic_roots_sync, second_order_async_radius,
    second_order_sync_radius, sync_root_modulus, AlphaSchedule, IterParams, OptimalParams,
    SpectrumBounds, DEFAULT_SPECTRUM_SAMPLES,
};
pub use perron::{perron_weight, PerronWeight};
