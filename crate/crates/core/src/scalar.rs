//! Floating-point scalar abstraction shared by the polynomial and kernel code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the generic parts of the crate are written against.
///
/// Implemented for `f32` and `f64`. Monte Carlo, quadrature and the exact
/// root counters work in `f64` (or exact integers) regardless.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    /// Conversion from a count or degree.
    fn of_u64(n: u64) -> Self {
        Self::from_u64(n).expect("integer is representable in every Scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance used when checking that a point lies on the unit sphere.
    fn unit_tolerance() -> Self {
        Self::of(1e-12).max(Self::epsilon() * Self::of(64.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
