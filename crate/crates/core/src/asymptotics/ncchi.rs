//! Means of chi and noncentral chi norms, and the mixed moments `M_k`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::limits::{m_kj, rho_bar};
use crate::error::{KssError, Result};
use crate::numerics::{integrate, QuadratureSpec};
use crate::rng::chunk_rng;

/// Above this noncentrality the convergent series is replaced by the
/// large-argument expansion.
pub const LAMBDA_SWITCH: f64 = 30.0;

const MAX_TERMS: usize = 4000;
const CHUNK: usize = 4096;

/// `E ||eta + lambda e_1||` for `eta ~ N(0, I_k)`, `lambda >= 0`.
///
/// For `lambda <= 30` this is `sqrt 2 Gamma((k+1)/2) / Gamma(k/2) * 1F1(-1/2; k/2; -x)`
/// with `x = lambda^2 / 2`, summed after Kummer's transformation
/// `e^{-x} 1F1((k+1)/2; k/2; x)`, whose terms are positive. The term ratio
/// decreases in `n`, so `term * r / (1 - r)` bounds the tail once `r < 1`.
pub fn ncchi_mean(k: usize, lambda: f64) -> Result<f64> {
    if k == 0 {
        return Err(KssError::InvalidDimension { got: 0, min: 1 });
    }
    let lambda = lambda.abs();
    if lambda > LAMBDA_SWITCH {
        return Ok(lambda * large_lambda_series(k, 2.0 / (lambda * lambda))?);
    }
    let x = 0.5 * lambda * lambda;
    let a = 0.5 * (k as f64 + 1.0);
    let b = 0.5 * k as f64;
    let mut term = (-x).exp();
    let mut sum = term;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let r = (a + nf) / (b + nf) * x / (nf + 1.0);
        term *= r;
        sum += term;
        if r < 1.0 && term * r / (1.0 - r) <= 1e-17 * sum {
            let front = std::f64::consts::SQRT_2 * (ln_gamma(a) - ln_gamma(b)).exp();
            return Ok(front * sum);
        }
    }
    Err(KssError::Series(format!("noncentral chi series for k = {k}, lambda = {lambda} did not converge")))
}

/// `sum_n (-1/2)_n ((1-k)/2)_n / n! * v^n` with `v = 2 / lambda^2`, summed
/// until the terms drop below `1e-17` (finite for odd `k`).
fn large_lambda_series(k: usize, v: f64) -> Result<f64> {
    let b = 0.5 * (1.0 - k as f64);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut last = f64::INFINITY;
    for n in 0..200 {
        let nf = n as f64;
        term *= (-0.5 + nf) * (b + nf) / (nf + 1.0) * v;
        if term == 0.0 || term.abs() <= 1e-17 * sum.abs() {
            return Ok(sum);
        }
        if term.abs() > last {
            break;
        }
        last = term.abs();
        sum += term;
    }
    if last <= 1e-13 {
        Ok(sum)
    } else {
        Err(KssError::Series(format!("asymptotic noncentral chi series for k = {k} stalled at {last:e}")))
    }
}

/// `E || a e_1 + s eta ||` for `a, s >= 0`, stable as `s -> 0`.
pub fn scaled_ncchi_mean(k: usize, a: f64, s: f64) -> Result<f64> {
    let a = a.abs();
    if s == 0.0 {
        return Ok(a);
    }
    if a > LAMBDA_SWITCH * s {
        let q = s / a;
        return Ok(a * large_lambda_series(k, 2.0 * q * q)?);
    }
    Ok(s * ncchi_mean(k, a / s)?)
}

fn chi_log_norm(k: usize) -> f64 {
    (0.5 * k as f64 - 1.0) * std::f64::consts::LN_2 + ln_gamma(0.5 * k as f64)
}

/// `E[ ||xi|| * ||a xi + s eta|| ]` for independent standard Gaussians in
/// `R^k`, by one-dimensional quadrature over `r = ||xi||`.
///
/// Returns `(value, error_estimate)`.
pub fn product_mean(k: usize, a: f64, s: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(KssError::InvalidDimension { got: 0, min: 1 });
    }
    let ln_norm = chi_log_norm(k);
    let kf = k as f64;
    let upper = kf.sqrt() + 12.0;
    let mut failure = None;
    let f = |r: f64| {
        if r <= 0.0 {
            return 0.0;
        }
        let density = ((kf - 1.0) * r.ln() - 0.5 * r * r - ln_norm).exp();
        match scaled_ncchi_mean(k, a * r, s) {
            Ok(v) => r * v * density,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let out = integrate(f, 0.0, upper, spec)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// The same expectation as [`product_mean`] by antithetic Monte Carlo,
/// for several `(a, s)` from one shared sample.
pub fn product_mean_mc(k: usize, coefs: &[(f64, f64)], n_pairs: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if k == 0 || n_pairs < 2 {
        return Err(KssError::InvalidArgument("need k >= 1 and at least two pairs".into()));
    }
    let chunks = n_pairs.div_ceil(CHUNK);
    let partial: Vec<Vec<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let count = CHUNK.min(n_pairs - c * CHUNK);
            let mut xi = vec![0.0; k];
            let mut eta = vec![0.0; k];
            let mut acc = vec![(0.0, 0.0); coefs.len()];
            for _ in 0..count {
                for v in xi.iter_mut().chain(eta.iter_mut()) {
                    *v = rng.sample(StandardNormal);
                }
                let nx = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                for (p, &(a, s)) in coefs.iter().enumerate() {
                    let mut pair = 0.0;
                    for sign in [1.0, -1.0] {
                        let sq: f64 = xi.iter().zip(&eta).map(|(x, e)| (a * x + sign * s * e).powi(2)).sum();
                        pair += sq.sqrt();
                    }
                    let v = 0.5 * nx * pair;
                    acc[p].0 += v;
                    acc[p].1 += v * v;
                }
            }
            acc
        })
        .collect();
    let n = n_pairs as f64;
    Ok((0..coefs.len())
        .map(|p| {
            let (s, s2) = partial.iter().fold((0.0, 0.0), |a, c| (a.0 + c[p].0, a.1 + c[p].1));
            let mean = s / n;
            let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
            (mean, (var / n).sqrt())
        })
        .collect())
}

/// `E[ ||xi|| ||r xi + sqrt(1 - r^2) eta|| ]`, the bounded form of `M_k`:
/// `M_k(c) = sqrt(1 + c^2) E_k(c / sqrt(1 + c^2))`.
pub fn correlated_chi_product(k: usize, r: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    if !(r.abs() <= 1.0) {
        return Err(KssError::OutOfRange {
            name: "r",
            value: r,
            lo: -1.0,
            hi: 1.0,
        });
    }
    product_mean(k, r, (1.0 - r * r).max(0.0).sqrt(), spec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MMethod {
    Quadrature,
    #[serde(rename = "mc")]
    MonteCarlo,
}

/// Which mixing constant enters `M_k(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mixing {
    /// `k < m`: `c = e^{-t^2/2} / sqrt(1 - e^{-t^2})`.
    Transverse,
    /// `k = m`: `c = rho_bar / sqrt(1 - rho_bar^2)`.
    Radial,
}

/// Correlation `r = c / sqrt(1 + c^2)` belonging to the mixing constant at `t`.
pub fn mixing_correlation(t: f64, mixing: Mixing) -> Result<f64> {
    match mixing {
        Mixing::Transverse => {
            if !(t > 0.0) {
                return Err(KssError::OutOfRange {
                    name: "t",
                    value: t,
                    lo: 0.0,
                    hi: f64::INFINITY,
                });
            }
            Ok((-0.5 * t * t).exp())
        }
        Mixing::Radial => rho_bar(t),
    }
}

/// The mixing constant `c` itself.
pub fn mixing_constant(t: f64, mixing: Mixing) -> Result<f64> {
    let r = mixing_correlation(t, mixing)?;
    Ok(r / (1.0 - r * r).sqrt())
}

/// `M_k(t) = E[ ||xi_k|| ||eta_k + c(t) xi_k|| ]` and an error estimate
/// (standard error for Monte Carlo, quadrature error otherwise).
pub fn big_m_k(k: usize, t: f64, mixing: Mixing, method: MMethod, budget: usize, seed: u64) -> Result<(f64, f64)> {
    let r = mixing_correlation(t, mixing)?;
    let s = (1.0 - r * r).sqrt();
    if s == 0.0 {
        return Err(KssError::OutOfRange {
            name: "t",
            value: t,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let (e, err) = match method {
        MMethod::Quadrature => correlated_chi_product(k, r, &QuadratureSpec::default().with_abs_tol(1e-13))?,
        MMethod::MonteCarlo => product_mean_mc(k, &[(r, s)], budget, seed)?[0],
    };
    Ok((e / s, err / s))
}

/// `m_{k,1}^2`, the value of `M_k` at zero mixing.
pub fn independent_product(k: usize) -> Result<f64> {
    Ok(m_kj(k, 1)?.powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kacrice::g_exact_m1;

    #[test]
    fn central_chi_mean() {
        for k in 1..8 {
            let want = m_kj(k, 1).unwrap();
            assert!((ncchi_mean(k, 0.0).unwrap() - want).abs() < 1e-14 * want);
        }
    }

    #[test]
    fn against_high_precision_values() {
        // 1F1 evaluated at 30 digits.
        let cases = [
            (1, 0.3, 0.83352248423441975098),
            (1, 1.0, 1.1666309411753725968),
            (1, 4.0, 4.0000142905168648113),
            (1, 31.0, 31.0),
            (2, 0.5, 1.3304473406107031708),
            (2, 7.0, 7.0718049536549784872),
            (2, 45.0, 45.011112483870900733),
            (3, 0.5, 1.6614429598986644737),
            (3, 7.0, 7.1428571428571292616),
            (3, 45.0, 45.022222222222222222),
            (5, 0.5, 2.1804160387249030523),
            (5, 7.0, 7.2827988338192430345),
            (5, 45.0, 45.044433470507544582),
        ];
        for (k, l, want) in cases {
            let got = ncchi_mean(k, l).unwrap();
            assert!((got - want).abs() < 4e-15 * want, "k={k} l={l} {got} {want}");
        }
    }

    #[test]
    fn series_and_expansion_meet_at_switch() {
        for k in [2usize, 3, 4, 7] {
            let below = ncchi_mean(k, LAMBDA_SWITCH * (1.0 - 1e-12)).unwrap();
            let above = ncchi_mean(k, LAMBDA_SWITCH * (1.0 + 1e-12)).unwrap();
            assert!((below - above).abs() < 1e-11 * below, "k={k} {below} {above}");
        }
    }

    #[test]
    fn one_dimensional_product_is_the_arcsine_form() {
        let spec = QuadratureSpec::default().with_abs_tol(1e-13);
        for r in [-1.0, -0.9, -0.3, 0.0, 0.5, 0.99, 1.0] {
            let (v, _) = correlated_chi_product(1, r, &spec).unwrap();
            assert!((v - g_exact_m1(r)).abs() < 1e-11, "r={r} {v}");
        }
    }

    #[test]
    fn endpoints_of_the_product() {
        let spec = QuadratureSpec::default().with_abs_tol(1e-13);
        for k in 1..5 {
            let (one, _) = correlated_chi_product(k, 1.0, &spec).unwrap();
            assert!((one - k as f64).abs() < 1e-10);
            let (zero, _) = correlated_chi_product(k, 0.0, &spec).unwrap();
            assert!((zero - independent_product(k).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn quadrature_and_mc_agree() {
        let (q, qe) = big_m_k(2, 1.0, Mixing::Transverse, MMethod::Quadrature, 0, 0).unwrap();
        let (mc, se) = big_m_k(2, 1.0, Mixing::Transverse, MMethod::MonteCarlo, 400_000, 9).unwrap();
        assert!((q - mc).abs() < 3.0 * (se * se + qe * qe).sqrt(), "{q} {mc} {se}");
    }

    #[test]
    fn large_t_tends_to_independence() {
        let (v, _) = big_m_k(3, 9.0, Mixing::Transverse, MMethod::Quadrature, 0, 0).unwrap();
        assert!((v - independent_product(3).unwrap()).abs() < 1e-9);
    }
}
