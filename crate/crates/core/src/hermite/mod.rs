//! Hermite (Wiener chaos) machinery behind the positivity of the limit
//! variance.

mod bound;
mod fcoef;
mod poly;

pub use bound::{column_integral, column_integral_limit, i2d_lower_bound, I2Bound, I2Column, I2Spec};
pub use fcoef::{f_coefficient, f_coefficients, f_tilde_22, multi_indices, parseval_sum, Estimate, FTilde22, MAX_ORDER};
pub use poly::{b_coefficient, b_eps, hermite_eval, hermite_table, mehler_h2};
