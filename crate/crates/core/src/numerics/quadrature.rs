//! Adaptive Gauss-Kronrod (10/21) quadrature and Gauss-Hermite rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{KssError, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_338_468_919,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    /// Sum over subintervals of |Kronrod - Gauss|, maximized over components.
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Segment<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Segment<N> {}
impl<const N: usize> PartialOrd for Segment<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Segment<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, a: f64, b: f64) -> Segment<N> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    for c in 0..N {
        kronrod[c] = WGK[10] * fc[c];
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for c in 0..N {
            let s = f1[c] + f2[c];
            kronrod[c] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = 0.0f64;
    for c in 0..N {
        value[c] = kronrod[c] * half;
        error = error.max(((kronrod[c] - gauss[c]) * half).abs());
    }
    Segment { a, b, value, error }
}

/// Adaptive integration of a vector-valued integrand over `[a, b]`.
///
/// All components share the same nodes, so linear combinations of the
/// components are integrated consistently. Convergence is declared when the
/// total error estimate falls below `max(abs_tol, rel_tol * max_c |I_c|)`.
pub fn integrate_vec<const N: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(KssError::InvalidArgument(format!(
            "integration bounds must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: [0.0; N],
            error: 0.0,
            evaluations: 0,
            intervals: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let first = gk21(&mut f, a, b);
    let mut evaluations = 21;
    let mut total = first.value;
    let mut total_err = first.error;
    heap.push(first);

    loop {
        let scale = total.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let tolerance = spec.abs_tol.max(spec.rel_tol * scale);
        if total_err <= tolerance {
            break;
        }
        if heap.len() >= spec.max_intervals {
            return Err(KssError::Quadrature {
                error: total_err,
                tolerance,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            return Err(KssError::Quadrature {
                error: total_err,
                tolerance,
            });
        }
        let left = gk21(&mut f, worst.a, mid);
        let right = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        for c in 0..N {
            total[c] += left.value[c] + right.value[c] - worst.value[c];
        }
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift accumulated by incremental updates.
    let mut value = [0.0; N];
    let mut error = 0.0;
    let intervals = heap.len();
    for seg in heap.into_iter() {
        for c in 0..N {
            value[c] += seg.value[c];
        }
        error += seg.error;
    }
    Ok(QuadResult {
        value,
        error,
        evaluations,
        intervals,
    })
}

/// Scalar adaptive integration; returns `(value, error_estimate)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let r = integrate_vec(|x| [f(x)], a, b, spec)?;
    Ok((r.value[0], r.error))
}

/// Gauss-Hermite rule for the standard normal weight: returns nodes `x_i`
/// and weights `w_i` with `sum_i w_i g(x_i) ~ E[g(xi)]`, `xi ~ N(0, 1)`.
///
/// Roots of the physicists' polynomials by Newton iteration on the
/// orthonormal recurrence, then rescaled.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
    const PIM4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    // Starting values: eigenvalues of the Jacobi matrix of the physicists'
    // polynomials (off-diagonal sqrt(i / 2)).
    let jacobi = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (0.5 * i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let mut start: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    start.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for (i, &z0) in start.iter().enumerate() {
        let mut z = z0;
        let mut pp = 0.0;
        for _ in 0..20 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / (pp * pp);
    }
    // Exact symmetry.
    for i in 0..n / 2 {
        let (a, b) = (0.5 * (x[n - 1 - i] - x[i]), 0.5 * (w[i] + w[n - 1 - i]));
        x[i] = -a;
        x[n - 1 - i] = a;
        w[i] = b;
        w[n - 1 - i] = b;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let sqrt2 = std::f64::consts::SQRT_2;
    let nodes: Vec<f64> = x.iter().map(|v| v * sqrt2).collect();
    let weights: Vec<f64> = w.iter().map(|v| v * inv_sqrt_pi).collect();
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_low_degree() {
        let spec = QuadratureSpec::default();
        for k in 0..20 {
            let (v, _) = integrate(|x| x.powi(k), 0.0, 1.0, &spec).unwrap();
            assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrands() {
        let spec = QuadratureSpec::default().with_abs_tol(1e-12);
        let (v, _) = integrate(|x| (-x * x).exp(), -30.0, 30.0, &spec).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-11);
        let (v, _) = integrate(|x| x.sqrt(), 0.0, 1.0, &spec).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn vector_components_share_nodes() {
        let spec = QuadratureSpec::default();
        let r = integrate_vec(|x| [x.sin(), x.cos(), 1.0], 0.0, 2.0, &spec).unwrap();
        assert!((r.value[0] - (1.0 - 2f64.cos())).abs() < 1e-12);
        assert!((r.value[1] - 2f64.sin()).abs() < 1e-12);
        assert!((r.value[2] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn reports_failure_when_budget_is_exhausted() {
        let spec = QuadratureSpec {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_intervals: 3,
        };
        let err = integrate(|x| (1.0 / x).sin(), 1e-3, 1.0, &spec).unwrap_err();
        assert!(matches!(err, KssError::Quadrature { .. }));
    }

    #[test]
    fn gauss_hermite_moments() {
        let (x, w) = gauss_hermite(20);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m0 - 1.0).abs() < 1e-14);
        assert!((m2 - 1.0).abs() < 1e-13);
        assert!((m4 - 3.0).abs() < 1e-12);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }
}
