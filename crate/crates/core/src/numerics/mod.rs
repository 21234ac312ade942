//! Numerical building blocks: quadrature, splines, truncated power series,
//! outward-rounded intervals and a few special functions.

pub mod interval;
pub mod quadrature;
pub mod series;
pub mod special;
pub mod spline;

pub use interval::Interval;
pub use quadrature::{gauss_hermite, integrate, integrate_vec, QuadResult, QuadratureSpec};
pub use series::PowerSeries;
pub use spline::CubicSpline;
