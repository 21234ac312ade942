//! Truncated power series in one variable.
//!
//! Used to evaluate ratios that are 0/0 at the origin (conditional variances
//! and correlations of the scaled kernel) without cancellation.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> PowerSeries<T> {
    /// Series with the given coefficients; the length fixes the truncation order.
    pub fn new(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "power series needs at least one coefficient");
        Self { coeffs }
    }

    pub fn constant(c: T, len: usize) -> Self {
        let mut coeffs = vec![T::zero(); len];
        coeffs[0] = c;
        Self { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).copied().unwrap_or_else(T::zero)
    }

    pub fn truncate(mut self, len: usize) -> Self {
        self.coeffs.truncate(len.max(1));
        self
    }

    pub fn eval(&self, z: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * z + c)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn derivative(&self) -> Self {
        if self.len() == 1 {
            return Self::constant(T::zero(), 1);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::of_u64(k as u64))
                .collect(),
        )
    }

    /// Divides by `z^k`; the first `k` coefficients are discarded and must be
    /// (numerically) zero.
    pub fn shift_down(&self, k: usize) -> Self {
        assert!(k < self.len(), "shift would empty the series");
        Self::new(self.coeffs[k..].to_vec())
    }

    /// Quotient of series; `other` must have a nonzero constant term.
    pub fn div(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        let b0 = other.coeffs[0];
        assert!(b0 != T::zero(), "series division by a series vanishing at 0");
        let mut q = vec![T::zero(); n];
        for i in 0..n {
            let mut acc = self.coeffs[i];
            for k in 1..=i {
                acc = acc - other.coeffs[k] * q[i - k];
            }
            q[i] = acc / b0;
        }
        Self::new(q)
    }

    pub fn exp(&self) -> Self {
        let n = self.len();
        let mut e = vec![T::zero(); n];
        e[0] = self.coeffs[0].exp();
        for i in 1..n {
            let mut acc = T::zero();
            for k in 1..=i {
                acc = acc + T::of_u64(k as u64) * self.coeffs[k] * e[i - k];
            }
            e[i] = acc / T::of_u64(i as u64);
        }
        Self::new(e)
    }

    /// Natural logarithm; requires a positive constant term.
    pub fn ln(&self) -> Self {
        let n = self.len();
        let s0 = self.coeffs[0];
        assert!(s0 > T::zero(), "logarithm of a series with non-positive constant term");
        let mut l = vec![T::zero(); n];
        l[0] = s0.ln();
        for i in 1..n {
            let mut acc = T::of_u64(i as u64) * self.coeffs[i];
            for k in 1..i {
                acc = acc - T::of_u64(k as u64) * l[k] * self.coeffs[i - k];
            }
            l[i] = acc / (T::of_u64(i as u64) * s0);
        }
        Self::new(l)
    }

    pub fn powf(&self, p: T) -> Self {
        self.ln().scale(p).exp()
    }
}

impl<T: Scalar> Add for &PowerSeries<T> {
    type Output = PowerSeries<T>;
    fn add(self, rhs: Self) -> PowerSeries<T> {
        let n = self.len().min(rhs.len());
        PowerSeries::new((0..n).map(|i| self.coeffs[i] + rhs.coeffs[i]).collect())
    }
}

impl<T: Scalar> Sub for &PowerSeries<T> {
    type Output = PowerSeries<T>;
    fn sub(self, rhs: Self) -> PowerSeries<T> {
        let n = self.len().min(rhs.len());
        PowerSeries::new((0..n).map(|i| self.coeffs[i] - rhs.coeffs[i]).collect())
    }
}

impl<T: Scalar> Mul for &PowerSeries<T> {
    type Output = PowerSeries<T>;
    fn mul(self, rhs: Self) -> PowerSeries<T> {
        let n = self.len().min(rhs.len());
        let mut out = vec![T::zero(); n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] = out[i + j] + self.coeffs[i] * rhs.coeffs[j];
            }
        }
        PowerSeries::new(out)
    }
}

impl<T: Scalar> Neg for &PowerSeries<T> {
    type Output = PowerSeries<T>;
    fn neg(self) -> PowerSeries<T> {
        self.scale(-T::one())
    }
}
