//! The `d -> infinity` limit of the scaled variance and its ingredients.

mod limits;
mod ncchi;
mod vinf;

pub use limits::{m_kj, rho_bar, sigma_bar_sq, T_SERIES};
pub use ncchi::{
    big_m_k, correlated_chi_product, independent_product, mixing_constant, mixing_correlation, ncchi_mean,
    product_mean, product_mean_mc, scaled_ncchi_mean, MMethod, Mixing, LAMBDA_SWITCH,
};
pub use vinf::{limit_weight, tail_bound, truncation_point, v_infinity, LimitIngredients, VInfRoute, VInfSpec, VInfinity};
