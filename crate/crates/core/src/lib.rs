//! Random polynomial systems from the Kostlan-Shub-Smale ensemble and the
//! variance of their number of real roots.
//!
//! * [`kss`]: sampling, evaluation, homogenization, covariance kernel.
//! * [`rootcount`]: certified real-root counts and Monte Carlo moments.
//! * [`kacrice`]: the finite-degree Kac-Rice variance integral.
//! * [`asymptotics`]: the limit variance as the degree grows.
//! * [`hermite`]: Hermite chaos coefficients and the second-chaos lower bound.

// Kronrod tables keep their published digits; `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod error;
pub mod hermite;
pub mod kacrice;
pub mod kss;
pub mod numerics;
pub mod rng;
pub mod rootcount;
pub mod scalar;
pub mod stats;

pub use error::{KssError, Result};
pub use scalar::Scalar;

pub type KssSystem = kss::System<f64>;
pub type SpherePoint = kss::SpherePoint<f64>;
pub use kss::{Form, MultiIndex};
pub use rootcount::{MomentEstimate, RootCountResult};
pub use kacrice::ScaledKernel;
