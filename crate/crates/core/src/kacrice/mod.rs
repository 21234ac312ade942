//! Finite-degree Kac-Rice computation of the root-count variance.

mod bounds;
mod gfun;
mod kernel;
mod variance;

pub use bounds::{decay_check, symmetrization_gap, DecayCheck};
pub use gfun::{det_in_place, g_exact_m1, g_functional, g_functional_many, GEstimate};
pub use kernel::{
    joint_covariance, scaled_kernel, schur_conditional, series_cutoff, ConditionalCovariance, Kernel,
    ScaledKernel,
};
pub use variance::{
    kac_rice_integrals, rice_constant, second_factorial_moment, variance_finite_d, z_grid, FiniteDVariance,
    GMethod, KacRiceSpec,
};
