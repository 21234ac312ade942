use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

/// `m`-dimensional surface measure of the unit sphere `S^m` in `R^{m+1}`.
///
/// `kappa(0) = 2` (two points), `kappa(1) = 2 pi`, `kappa(2) = 4 pi`.
pub fn sphere_measure(m: usize) -> f64 {
    let h = (m as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / ln_gamma(h).exp()
}

pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn factorial(n: u64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Binomial coefficient as a float, by the multiplicative formula.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 1..=k {
        acc *= (n - k + i) as f64;
        acc /= i as f64;
    }
    acc
}

/// `(a)_n = a (a + 1) ... (a + n - 1)`.
pub fn pochhammer(a: f64, n: u64) -> f64 {
    (0..n).map(|i| a + i as f64).product()
}
