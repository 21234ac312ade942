//! `G(rho, D) = E |det X| |det Z|` for an `m x m` standard Gaussian matrix
//! `X` and `Z = diag(rho, D, ..., D) X + diag(sqrt(1 - rho^2), sqrt(1 - D^2), ...) Y`
//! with `Y` an independent copy of `X`.
//!
//! Rows of the matrices index the tangent directions, so `rho` mixes the
//! first row (the direction joining the two points) and `D` the others.
//! Transposing both matrices leaves `G` unchanged, so the row convention is
//! a labelling choice only.

use std::f64::consts::FRAC_2_PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{KssError, Result};
use crate::rng::chunk_rng;

/// Pairs per deterministic work chunk.
const CHUNK: usize = 4096;

/// Closed form for `m = 1`: `(2/pi) (sqrt(1 - rho^2) + rho asin(rho))`.
pub fn g_exact_m1(rho: f64) -> f64 {
    let r = rho.clamp(-1.0, 1.0);
    FRAC_2_PI * ((1.0 - r * r).sqrt() + r * r.asin())
}

/// Determinant of a small row-major square matrix, destroying it.
pub fn det_in_place(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        let p = a[piv * n + col];
        if p == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            det = -det;
        }
        det *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
            }
        }
    }
    det
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GEstimate {
    pub value: f64,
    pub se: f64,
}

fn check_params(params: &[(f64, f64)]) -> Result<()> {
    for &(r, d) in params {
        if !(r.abs() <= 1.0 && d.abs() <= 1.0) {
            return Err(KssError::OutOfRange {
                name: "rho or D",
                value: if r.abs() > 1.0 { r } else { d },
                lo: -1.0,
                hi: 1.0,
            });
        }
    }
    Ok(())
}

/// Monte Carlo `G` at several `(rho, D)` from one shared sample of
/// `n_pairs` antithetic pairs `(X, Y)`, `(X, -Y)`.
///
/// Sharing the sample (common random numbers) makes the estimates a smooth
/// function of the parameters. The result depends only on `seed`, not on
/// the number of worker threads.
pub fn g_functional_many(params: &[(f64, f64)], m: usize, n_pairs: usize, seed: u64) -> Result<Vec<GEstimate>> {
    check_params(params)?;
    if m == 0 || n_pairs < 2 {
        return Err(KssError::InvalidArgument("need m >= 1 and at least two pairs".into()));
    }
    let chunks = n_pairs.div_ceil(CHUNK);
    let coefs: Vec<(f64, f64, f64, f64)> = params
        .iter()
        .map(|&(r, d)| (r, (1.0 - r * r).max(0.0).sqrt(), d, (1.0 - d * d).max(0.0).sqrt()))
        .collect();
    let partial: Vec<Vec<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let count = CHUNK.min(n_pairs - c * CHUNK);
            let mm = m * m;
            let mut x = vec![0.0; mm];
            let mut y = vec![0.0; mm];
            let mut w = vec![0.0; mm];
            let mut acc = vec![(0.0, 0.0); params.len()];
            for _ in 0..count {
                for v in x.iter_mut().chain(y.iter_mut()) {
                    *v = rng.sample(StandardNormal);
                }
                w.copy_from_slice(&x);
                let dx = det_in_place(&mut w, m).abs();
                for (p, &(r, sr, d, sd)) in coefs.iter().enumerate() {
                    let mut pair = 0.0;
                    for sign in [1.0, -1.0] {
                        for i in 0..m {
                            let (a, b) = if i == 0 { (r, sr) } else { (d, sd) };
                            for k in 0..m {
                                w[i * m + k] = a * x[i * m + k] + sign * b * y[i * m + k];
                            }
                        }
                        pair += det_in_place(&mut w, m).abs();
                    }
                    let v = 0.5 * dx * pair;
                    acc[p].0 += v;
                    acc[p].1 += v * v;
                }
            }
            acc
        })
        .collect();
    let n = n_pairs as f64;
    Ok((0..params.len())
        .map(|p| {
            let (s, s2) = partial.iter().fold((0.0, 0.0), |a, c| (a.0 + c[p].0, a.1 + c[p].1));
            let mean = s / n;
            let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
            GEstimate {
                value: mean,
                se: (var / n).sqrt(),
            }
        })
        .collect())
}

/// Monte Carlo `G(rho, D)` with its standard error.
pub fn g_functional(rho: f64, dcoef: f64, m: usize, n_mc: usize, seed: u64) -> Result<(f64, f64)> {
    let g = g_functional_many(&[(rho, dcoef)], m, n_mc, seed)?[0];
    Ok((g.value, g.se))
}
