//! Probabilists' Hermite polynomials and the chaos coefficients of the
//! Dirac delta at the origin.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{KssError, Result};
use crate::numerics::special::factorial;
use crate::numerics::{integrate, QuadratureSpec};
use crate::rng::chunk_rng;

const CHUNK: usize = 4096;

/// `H_n(x)` from `H_{n+1} = x H_n - n H_{n-1}`.
pub fn hermite_eval(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `[H_0(x), ..., H_n(x)]`.
pub fn hermite_table(n: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for k in 1..n {
        let next = x * out[k] - k as f64 * out[k - 1];
        out.push(next);
    }
}

fn phi0() -> f64 {
    1.0 / (2.0 * std::f64::consts::PI).sqrt()
}

/// Coefficient of `H_alpha` in the expansion of `delta_0` on `R^m`:
/// zero if any component is odd, else
/// `prod_j phi(0) (-1/2)^{alpha_j/2} / (alpha_j/2)!`.
pub fn b_coefficient(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    alpha
        .iter()
        .map(|&a| {
            let j = a / 2;
            phi0() * (-0.5f64).powi(j as i32) / factorial(j as u64)
        })
        .product()
}

/// Coefficient of `H_alpha` for the box kernel
/// `delta_eps = (2 eps)^{-m} 1{|y|_inf <= eps}`, by quadrature.
pub fn b_eps(alpha: &[u32], eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(KssError::OutOfRange {
            name: "eps",
            value: eps,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let spec = QuadratureSpec::default().with_abs_tol(1e-15).with_rel_tol(1e-13);
    let mut out = 1.0;
    for &a in alpha {
        if a % 2 == 1 {
            return Ok(0.0);
        }
        let (v, _) = integrate(
            |x| hermite_eval(a as usize, x) * phi0() * (-0.5 * x * x).exp(),
            -eps,
            eps,
            &spec,
        )?;
        out *= v / (2.0 * eps) / factorial(a as u64);
    }
    Ok(out)
}

/// Monte Carlo `E[H_2(xi) H_2(eta)]` for a standard pair with correlation
/// `rho`; Mehler's formula gives `2 rho^2`. Returns `(estimate, se)`.
pub fn mehler_h2(rho: f64, n: usize, seed: u64) -> Result<(f64, f64)> {
    if !(rho.abs() <= 1.0) || n < 2 {
        return Err(KssError::InvalidArgument(format!("need |rho| <= 1 and n >= 2, got {rho}, {n}")));
    }
    let s = (1.0 - rho * rho).sqrt();
    let (sum, sum2) = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let mut acc = (0.0, 0.0);
            for _ in 0..CHUNK.min(n - c * CHUNK) {
                let x: f64 = rng.sample(StandardNormal);
                let z: f64 = rng.sample(StandardNormal);
                let y = rho * x + s * z;
                let v = (x * x - 1.0) * (y * y - 1.0);
                acc.0 += v;
                acc.1 += v * v;
            }
            acc
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum2 / nf - mean * mean) * nf / (nf - 1.0);
    Ok((mean, (var / nf).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gauss_hermite;

    #[test]
    fn recurrence_values() {
        assert_eq!(hermite_eval(0, 3.0), 1.0);
        assert_eq!(hermite_eval(2, 2.0), 3.0);
        assert_eq!(hermite_eval(3, 1.0), -2.0);
        // H_4 = x^4 - 6x^2 + 3
        assert_eq!(hermite_eval(4, 2.0), 16.0 - 24.0 + 3.0);
        let mut t = Vec::new();
        hermite_table(6, 0.7, &mut t);
        for (n, v) in t.iter().enumerate() {
            assert_eq!(*v, hermite_eval(n, 0.7));
        }
    }

    #[test]
    fn orthogonality_by_gauss_hermite() {
        let (x, w) = gauss_hermite(200);
        for n in 0..=10 {
            for k in 0..=10 {
                // Normalized by sqrt(n! k!): the raw products reach 1e5 and
                // round at the 1e-10 level.
                let s: f64 = x.iter().zip(&w).map(|(&x, &w)| w * hermite_eval(n, x) * hermite_eval(k, x)).sum();
                let s = s / (factorial(n as u64) * factorial(k as u64)).sqrt();
                let want = if n == k { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-10, "n={n} k={k} {s}");
            }
        }
    }

    #[test]
    fn delta_coefficients() {
        let b0 = b_coefficient(&[0, 0, 0]);
        assert!((b0 - (2.0 * std::f64::consts::PI).powf(-1.5)).abs() < 1e-16);
        assert_eq!(b_coefficient(&[2, 1]), 0.0);
        let b20 = b_coefficient(&[2, 0]);
        assert!((b20 + 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-16);
        for a in [[0u32, 0], [2, 0], [2, 2], [4, 2], [6, 0]] {
            let sign = if (a[0] + a[1]) / 2 % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(b_coefficient(&a).signum(), sign);
        }
    }

    #[test]
    fn box_kernel_converges() {
        let b = b_coefficient(&[2]);
        let be = b_eps(&[2], 1e-3).unwrap();
        assert!((b - be).abs() < 1e-6, "{b} {be}");
        assert_eq!(b_eps(&[3], 0.1).unwrap(), 0.0);
    }

    #[test]
    fn mehler() {
        let (v, se) = mehler_h2(0.7, 400_000, 3).unwrap();
        assert!((v - 0.98).abs() < 3.0 * se, "{v} {se}");
    }
}
