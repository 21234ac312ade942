//! Lower bound for the limit variance from one second-chaos term.
//!
//! Keeping only the `H_2(Y'_{l,k})` term of the second chaos, Mehler's
//! formula gives, in the scale of `d^{-m/2} Var(N^P)`,
//!
//! `Var(I_2) >= (kappa_m kappa_{m-1} / 2) (b_0^m f~)^2 int_0^{sqrt(d) pi} (sqrt(d) sin(z / sqrt d))^{m-1} r(z)^2 dz`
//!
//! where `r` is the correlation of the normalized derivative column `k`
//! at two points at scaled angle `z`: `D = cos^{d-1}` for a transverse
//! column, `B = cos^d - (d - 1) cos^{d-2} sin^2` for the radial one.

use serde::{Deserialize, Serialize};

use super::fcoef::{f_tilde_22, Estimate};
use super::poly::b_coefficient;
use crate::error::{KssError, Result};
use crate::kacrice::{rice_constant, Kernel};
use crate::numerics::{integrate, QuadratureSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum I2Column {
    /// Derivative along the great circle through both points.
    Radial,
    /// Derivative orthogonal to it (needs `m >= 2`).
    Transverse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct I2Spec {
    pub quadrature: QuadratureSpec,
    /// `None`: transverse when `m >= 2`, radial for `m = 1`.
    pub column: Option<I2Column>,
    pub n_mc: usize,
    pub seed: u64,
}

impl Default for I2Spec {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default().with_abs_tol(1e-11),
            column: None,
            n_mc: 1_000_000,
            seed: 0x6932_6400_0000_0001,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct I2Bound {
    pub d: u64,
    pub m: usize,
    pub column: I2Column,
    /// `int_0^{sqrt(d) pi} (sqrt(d) sin)^{m-1} r^2 dz`.
    pub integral: f64,
    pub integral_error: f64,
    /// Bound with `f~` normalized as an expansion coefficient (`1 / beta!`).
    pub value: f64,
    pub se: f64,
    /// Bound with the Frobenius-form `f~` (no `1 / 2!`), four times `value`.
    pub value_frobenius: f64,
    pub se_frobenius: f64,
    pub f_tilde: Estimate,
}

/// `int_0^{sqrt(d) pi} (sqrt(d) sin(z / sqrt d))^{m-1} r(z)^2 dz`, folded at
/// the equator (`r^2` is symmetric there). Returns `(value, error)`.
pub fn column_integral(d: u64, m: usize, column: I2Column, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    if d < 2 {
        return Err(KssError::InvalidDegree(d));
    }
    let sd = (d as f64).sqrt();
    let zmax = sd * std::f64::consts::FRAC_PI_2;
    let mut failure = None;
    let mut f = |z: f64| match Kernel::new(z, d) {
        Ok(k) => {
            let r = match column {
                I2Column::Radial => k.b,
                I2Column::Transverse => k.dd,
            };
            (sd * (z / sd).sin()).powi(m as i32 - 1) * r * r
        }
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    // The integrand lives on z = O(1); split there so the tail is cheap.
    let cut = 12.0f64.min(zmax);
    let (a, ea) = integrate(&mut f, 0.0, cut, spec)?;
    let (b, eb) = integrate(&mut f, cut, zmax, spec)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((2.0 * (a + b), 2.0 * (ea + eb)))
}

/// Lower bound on `d^{-m/2} Var(N^P)` from the second chaos.
pub fn i2d_lower_bound(d: u64, m: usize, spec: &I2Spec) -> Result<I2Bound> {
    if m == 0 {
        return Err(KssError::InvalidDimension { got: 0, min: 1 });
    }
    let column = spec
        .column
        .unwrap_or(if m >= 2 { I2Column::Transverse } else { I2Column::Radial });
    if column == I2Column::Transverse && m < 2 {
        return Err(KssError::InvalidArgument("no transverse column when m = 1".into()));
    }
    let (integral, integral_error) = column_integral(d, m, column, &spec.quadrature)?;
    let f = f_tilde_22(m, spec.n_mc, spec.seed)?;
    let b0m = b_coefficient(&vec![0; m]);
    let pre = 0.5 * rice_constant(m) * (2.0 * std::f64::consts::PI).powi(m as i32) * b0m * b0m * integral;
    let scaled = |e: Estimate| (pre * e.value * e.value, pre * 2.0 * e.value.abs() * e.se);
    let (value, se) = scaled(f.coefficient);
    let (value_frobenius, se_frobenius) = scaled(f.frobenius);
    Ok(I2Bound {
        d,
        m,
        column,
        integral,
        integral_error,
        value,
        se,
        value_frobenius,
        se_frobenius,
        f_tilde: f.coefficient,
    })
}

/// `lim_d` of [`column_integral`]: `Gamma(m/2)` (transverse) or
/// `int_0^inf 2 t^{m-1} (1 - t^2)^2 e^{-t^2} dt` (radial).
pub fn column_integral_limit(m: usize, column: I2Column) -> f64 {
    let g = |a: f64| statrs::function::gamma::gamma(a);
    let h = 0.5 * m as f64;
    match column {
        I2Column::Transverse => g(h),
        I2Column::Radial => g(h) - 2.0 * g(h + 1.0) + g(h + 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_approaches_its_limit() {
        let spec = QuadratureSpec::default().with_abs_tol(1e-12);
        for (m, col) in [(1, I2Column::Radial), (2, I2Column::Transverse), (3, I2Column::Radial)] {
            let lim = column_integral_limit(m, col);
            let mut last = f64::INFINITY;
            for d in [100u64, 1000, 10_000] {
                let (v, _) = column_integral(d, m, col, &spec).unwrap();
                let gap = (v - lim).abs();
                assert!(gap < last, "m={m} d={d} {v} {lim}");
                last = gap;
            }
            assert!(last < 1e-3 * lim);
        }
    }

    #[test]
    fn radial_limit_value() {
        // 3 sqrt(pi) / 4 for m = 1
        assert!((column_integral_limit(1, I2Column::Radial) - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }
}
