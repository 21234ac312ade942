//! The covariance kernel `cos^d(psi)` of a KSS field and its derivatives at
//! the scaled angle `psi = z / sqrt(d)`.

use crate::error::{KssError, Result};
use crate::numerics::PowerSeries;
use crate::scalar::Scalar;

/// Taylor coefficients of `ln cos x` at `x^2, x^4, ..., x^18`.
const LN_COS: [f64; 9] = [
    -1.0 / 2.0,
    -1.0 / 12.0,
    -1.0 / 45.0,
    -17.0 / 2520.0,
    -31.0 / 14175.0,
    -691.0 / 935550.0,
    -10922.0 / 42567525.0,
    -929569.0 / 10216206000.0,
    -3202291.0 / 97692469875.0,
];

/// Series length (in powers of `z`) used below [`series_cutoff`].
const SERIES_LEN: usize = 19;

/// Below this `z` the ratios defining `sigma_sq` and `rho` are evaluated by
/// their Taylor series in `z`.
pub fn series_cutoff(d: u64) -> f64 {
    0.05 * (d as f64).sqrt().min(1.0)
}

/// `(A, B, C, D, sigma^2, rho)` at `z / sqrt(d)`:
///
/// * `A = -sqrt(d) cos^{d-1} sin`, the `z`-derivative of `C`,
/// * `B = cos^d - (d - 1) cos^{d-2} sin^2`, minus the second derivative,
/// * `C = cos^d`, `D = cos^{d-1}`,
/// * `sigma^2 = 1 - A^2 / (1 - C^2)`,
/// * `rho = (B (1 - C^2) - A^2 C) / (1 - C^2 - A^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel<T> {
    pub z: T,
    pub d: u64,
    pub a: T,
    pub b: T,
    pub c: T,
    pub dd: T,
    pub sigma_sq: T,
    pub rho: T,
    /// `1 - C^2`, computed without cancellation.
    pub one_minus_c2: T,
    small: Option<SmallZ<T>>,
}

/// Values that are `0/0` at the origin, stored divided by their leading
/// power of `z`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct SmallZ<T> {
    sigma_sq_over_z2: T,
    one_minus_c2_over_z2: T,
}

fn small_z_series<T: Scalar>(d: u64) -> [PowerSeries<T>; 7] {
    let df = T::of_u64(d);
    // L(z) = d ln cos(z / sqrt d) = sum_k l_k d^{1-k} z^{2k}
    let mut l = vec![T::zero(); SERIES_LEN];
    let mut dpow = T::one();
    for (k, &lk) in LN_COS.iter().enumerate() {
        if 2 * (k + 1) >= SERIES_LEN {
            break;
        }
        l[2 * (k + 1)] = T::of(lk) * dpow;
        dpow = dpow / df;
    }
    let big_l = PowerSeries::new(l);
    let c = big_l.exp();
    let a = c.derivative();
    let b = -&a.derivative();
    let dd = big_l.scale(T::one() - T::one() / df).exp();
    let one = PowerSeries::constant(T::one(), SERIES_LEN);
    let omc2 = &one - &(&c * &c);
    let a2 = &a * &a;
    let den = &omc2 - &a2;
    let num_rho = &(&b * &omc2) - &(&a2 * &c);
    [c, a, b, dd, omc2, den, num_rho]
}

impl<T: Scalar> Kernel<T> {
    /// Kernel at `z` in `[0, sqrt(d) pi]`, `d >= 2`.
    pub fn new(z: T, d: u64) -> Result<Self> {
        Self::with_cutoff(z, d, series_cutoff(d))
    }

    /// As [`Kernel::new`] with an explicit series cutoff `z0`.
    pub fn with_cutoff(z: T, d: u64, z0: f64) -> Result<Self> {
        if d < 2 {
            return Err(KssError::InvalidDegree(d));
        }
        let sd = T::of_u64(d).sqrt();
        let zmax = sd * T::PI();
        if !(z >= T::zero() && z <= zmax) {
            return Err(KssError::OutOfRange {
                name: "z",
                value: z.to_f64_lossy(),
                lo: 0.0,
                hi: zmax.to_f64_lossy(),
            });
        }
        // Past the equator use the reflection psi -> pi - psi.
        let half = zmax / T::of(2.0);
        if z > half {
            let k = Self::first_half(zmax - z, d, z0);
            let even = d.is_multiple_of(2);
            let s = |v: T, e: bool| if e { v } else { -v };
            return Ok(Self {
                z,
                a: s(k.a, !even),
                b: s(k.b, even),
                c: s(k.c, even),
                dd: s(k.dd, !even),
                rho: s(k.rho, even),
                ..k
            });
        }
        Ok(Self::first_half(z, d, z0))
    }

    /// Closed-form evaluation at any `z`, without the series or the
    /// reflection. Loses accuracy near `z = 0` and `z = sqrt(d) pi`.
    pub fn direct(z: T, d: u64) -> Self {
        Self::closed_form(z, d)
    }

    fn first_half(z: T, d: u64, z0: f64) -> Self {
        if z.to_f64_lossy() < z0 {
            return Self::by_series(z, d);
        }
        Self::closed_form(z, d)
    }

    fn closed_form(z: T, d: u64) -> Self {
        let df = T::of_u64(d);
        let x = z / df.sqrt();
        let (s, cx) = x.sin_cos();
        let two = T::of(2.0);
        // ln cos x = ln1p(-2 sin^2(x/2)), accurate for small x.
        let sh = (x / two).sin();
        let ln_cos = (-two * sh * sh).ln_1p();
        let cos_dm2 = if cx > T::zero() {
            ((df - two) * ln_cos).exp()
        } else {
            cx.powi(d as i32 - 2)
        };
        let dd = cos_dm2 * cx;
        let c = dd * cx;
        let a = -df.sqrt() * dd * s;
        let b = c - (df - T::one()) * cos_dm2 * s * s;
        let one_minus_c2 = if cx > T::zero() {
            -(two * df * ln_cos).exp_m1()
        } else {
            T::one() - c * c
        };
        let sigma_sq = T::one() - a * a / one_minus_c2;
        let rho = (b * one_minus_c2 - a * a * c) / (one_minus_c2 - a * a);
        Self {
            z,
            d,
            a,
            b,
            c,
            dd,
            sigma_sq,
            rho,
            one_minus_c2,
            small: None,
        }
    }

    fn by_series(z: T, d: u64) -> Self {
        let [c, a, b, dd, omc2, den, num_rho] = small_z_series::<T>(d);
        // sigma^2 = den / omc2 with den = O(z^4), omc2 = O(z^2).
        let q = omc2.shift_down(2);
        let sig_over_z2 = den.shift_down(4).div(&q);
        let rho = num_rho.shift_down(4).div(&den.shift_down(4));
        let z2 = z * z;
        let small = SmallZ {
            sigma_sq_over_z2: sig_over_z2.eval(z),
            one_minus_c2_over_z2: q.eval(z),
        };
        Self {
            z,
            d,
            a: a.eval(z),
            b: b.eval(z),
            c: c.eval(z),
            dd: dd.eval(z),
            sigma_sq: small.sigma_sq_over_z2 * z2,
            rho: rho.eval(z),
            one_minus_c2: small.one_minus_c2_over_z2 * z2,
            small: Some(small),
        }
    }

    /// `(sqrt(d) sin(z / sqrt d))^{m-1} sigma^2 / (1 - C^2)^{m/2}`, the
    /// geometric and regression weight of the Rice integrand. Finite at
    /// `z = 0` for every `m >= 1`.
    pub fn rice_weight(&self, m: usize) -> T {
        let df = T::of_u64(self.d);
        let sd = df.sqrt();
        let x = self.z / sd;
        let mf = T::of_u64(m as u64);
        let half_m = mf / T::of(2.0);
        match self.small {
            Some(s) => {
                // z^{m-1} sinc^{m-1} * z^2 S / (z^m Q^{m/2}) = z * sinc^{m-1} S / Q^{m/2}
                let sinc = if x == T::zero() { T::one() } else { x.sin() / x };
                self.z * sinc.powi(m as i32 - 1) * s.sigma_sq_over_z2
                    / s.one_minus_c2_over_z2.powf(half_m)
            }
            None => {
                (sd * x.sin()).powi(m as i32 - 1) * self.sigma_sq / self.one_minus_c2.powf(half_m)
            }
        }
    }

    /// Conditional covariance blocks of the scaled spherical derivatives
    /// at the two points, given that the field vanishes at both.
    pub fn conditional_covariance(&self, m: usize) -> ConditionalCovariance<T> {
        let mut b11 = vec![T::one(); m];
        let mut b12 = vec![self.dd; m];
        b11[0] = self.sigma_sq;
        b12[0] = self.sigma_sq * self.rho;
        ConditionalCovariance { b11, b12 }
    }
}

/// Diagonals of the blocks `B11 = diag(sigma^2, 1, ..., 1)` and
/// `B12 = diag(sigma^2 rho, D, ..., D)` of the conditional covariance
/// `[[B11, B12], [B12, B11]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalCovariance<T> {
    pub b11: Vec<T>,
    pub b12: Vec<T>,
}

impl<T: Scalar> ConditionalCovariance<T> {
    /// The full matrix is a direct sum of 2x2 blocks `[[a, b], [b, a]]`, so
    /// it is PSD iff `a >= |b|` in every coordinate.
    pub fn is_psd(&self, tol: T) -> bool {
        self.b11
            .iter()
            .zip(&self.b12)
            .all(|(&a, &b)| a >= -tol && a + tol >= b.abs())
    }

    /// Dense `2m x 2m` form, ordered `(Y'(s), Y'(t))`.
    pub fn dense(&self) -> Vec<Vec<T>> {
        let m = self.b11.len();
        let mut out = vec![vec![T::zero(); 2 * m]; 2 * m];
        for k in 0..m {
            out[k][k] = self.b11[k];
            out[m + k][m + k] = self.b11[k];
            out[k][m + k] = self.b12[k];
            out[m + k][k] = self.b12[k];
        }
        out
    }
}

/// Covariance of `(Y(s), Y(t), Y'(s)/sqrt d, Y'(t)/sqrt d)` for one
/// component, in the pair frame, as a `(2 + 2m)`-square matrix.
pub fn joint_covariance<T: Scalar>(k: &Kernel<T>, m: usize) -> Vec<Vec<T>> {
    let n = 2 + 2 * m;
    let mut c = vec![vec![T::zero(); n]; n];
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = T::one();
    }
    c[0][1] = k.c;
    c[1][0] = k.c;
    // Cov(Y(t), Y'_1(s)) = -A, Cov(Y(s), Y'_1(t)) = A.
    c[1][2] = -k.a;
    c[2][1] = -k.a;
    c[0][2 + m] = k.a;
    c[2 + m][0] = k.a;
    for j in 0..m {
        let v = if j == 0 { k.b } else { k.dd };
        c[2 + j][2 + m + j] = v;
        c[2 + m + j][2 + j] = v;
    }
    c
}

/// Conditional covariance of the derivative block given the values, as the
/// Schur complement `S33 - S31 S11^{-1} S13` of [`joint_covariance`].
pub fn schur_conditional(joint: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = joint.len();
    let det = joint[0][0] * joint[1][1] - joint[0][1] * joint[1][0];
    let inv = [
        [joint[1][1] / det, -joint[0][1] / det],
        [-joint[1][0] / det, joint[0][0] / det],
    ];
    (2..n)
        .map(|i| {
            (2..n)
                .map(|j| {
                    let mut v = joint[i][j];
                    for p in 0..2 {
                        for q in 0..2 {
                            v -= joint[i][p] * inv[p][q] * joint[q][j];
                        }
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// Scalar alias used throughout the crate.
pub type ScaledKernel = Kernel<f64>;

/// `f64` convenience wrapper for [`Kernel::new`].
pub fn scaled_kernel(z: f64, d: u64) -> Result<ScaledKernel> {
    Kernel::new(z, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coincidence_values() {
        let k = scaled_kernel(0.0, 7).unwrap();
        assert_eq!((k.a, k.b, k.c, k.dd), (0.0, 1.0, 1.0, 1.0));
        assert_eq!(k.sigma_sq, 0.0);
        assert!((k.rho + 1.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range() {
        assert!(scaled_kernel(-0.1, 10).is_err());
        assert!(scaled_kernel(10f64.sqrt() * std::f64::consts::PI + 1e-9, 10).is_err());
        assert!(scaled_kernel(0.5, 1).is_err());
    }

    #[test]
    fn series_and_direct_forms_meet_at_the_cutoff() {
        for d in [2u64, 3, 10, 100, 10_000, 1_000_000] {
            let z0 = series_cutoff(d);
            let s = Kernel::<f64>::by_series(z0, d);
            let f = Kernel::<f64>::direct(z0, d);
            assert!((s.a - f.a).abs() < 1e-13, "d={d}");
            assert!((s.b - f.b).abs() < 1e-13, "d={d}");
            assert!((s.c - f.c).abs() < 1e-14, "d={d}");
            assert!((s.dd - f.dd).abs() < 1e-14, "d={d}");
            assert!((s.sigma_sq - f.sigma_sq).abs() < 1e-11, "d={d}");
            assert!((s.rho - f.rho).abs() < 1e-8, "d={d}: {} {}", s.rho, f.rho);
            for m in 1..=3 {
                let (ws, wf) = (s.rice_weight(m), f.rice_weight(m));
                assert!((ws - wf).abs() < 1e-9 * wf.abs(), "d={d} m={m}: {ws} {wf}");
            }
        }
    }

    #[test]
    fn reflection_about_the_equator() {
        let d = 9u64;
        let zmax = (d as f64).sqrt() * std::f64::consts::PI;
        for z in [0.3, 1.0, 2.5] {
            let k = scaled_kernel(z, d).unwrap();
            let r = scaled_kernel(zmax - z, d).unwrap();
            let x = (zmax - z) / 3.0;
            let (s, c) = x.sin_cos();
            assert!((r.c - c.powi(9)).abs() < 1e-14);
            assert!((r.a + 3.0 * c.powi(8) * s).abs() < 1e-13);
            assert!((r.sigma_sq - k.sigma_sq).abs() < 1e-12);
            assert!((r.rho + k.rho).abs() < 1e-12, "{} {}", r.rho, k.rho);
        }
    }

    #[test]
    fn single_precision_kernel() {
        let k = Kernel::<f32>::new(1.0, 1000).unwrap();
        let e = scaled_kernel(1.0, 1000).unwrap();
        assert!((k.c as f64 - e.c).abs() < 1e-5);
        assert!((k.sigma_sq as f64 - e.sigma_sq).abs() < 1e-4);
    }

    #[test]
    fn schur_complement_matches_blocks() {
        for (z, d) in [(0.7, 5u64), (1.9, 40), (0.02, 12)] {
            let k = scaled_kernel(z, d).unwrap();
            let m = 3;
            let s = schur_conditional(&joint_covariance(&k, m));
            let cc = k.conditional_covariance(m).dense();
            for i in 0..2 * m {
                for j in 0..2 * m {
                    assert!((s[i][j] - cc[i][j]).abs() < 1e-10, "({z},{d}) [{i}][{j}]");
                }
            }
        }
    }
}
