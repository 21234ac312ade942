//! Chaos coefficients of `|det|` on `m x m` standard Gaussian matrices.
//!
//! `f_beta = E[ |det Y| prod_{ij} H_{beta_ij}(Y_ij) ] / beta!` with `beta`
//! indexed row-major. All estimates share one sample of antithetic pairs
//! `(Y, -Y)`, so coefficients with odd `|beta|` vanish identically and the
//! row/column symmetries hold up to sampling noise only through `beta`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::poly::hermite_table;
use crate::error::{KssError, Result};
use crate::kacrice::det_in_place;
use crate::numerics::special::factorial;
use crate::rng::chunk_rng;

const CHUNK: usize = 2048;
/// Largest `|beta|` accepted.
pub const MAX_ORDER: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

fn beta_factorial(beta: &[u32]) -> f64 {
    beta.iter().map(|&b| factorial(b as u64)).product()
}

/// `f_beta` for every `beta` in `betas` from one shared sample of `n` matrices.
pub fn f_coefficients(betas: &[Vec<u32>], m: usize, n: usize, seed: u64) -> Result<Vec<Estimate>> {
    if m == 0 || n < 2 {
        return Err(KssError::InvalidArgument("need m >= 1 and n >= 2".into()));
    }
    for b in betas {
        if b.len() != m * m {
            return Err(KssError::InvalidArgument(format!("beta has {} entries, expected {}", b.len(), m * m)));
        }
        if b.iter().sum::<u32>() > MAX_ORDER {
            return Err(KssError::InvalidArgument(format!("|beta| above {MAX_ORDER}")));
        }
    }
    let top = betas.iter().flatten().copied().max().unwrap_or(0) as usize;
    let mm = m * m;
    let partial: Vec<Vec<(f64, f64)>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let mut y = vec![0.0; mm];
            let mut w = vec![0.0; mm];
            let mut tables: Vec<Vec<f64>> = vec![Vec::new(); mm];
            let mut acc = vec![(0.0, 0.0); betas.len()];
            for _ in 0..CHUNK.min(n - c * CHUNK) {
                for v in y.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                w.copy_from_slice(&y);
                let det = det_in_place(&mut w, m).abs();
                for (t, &v) in tables.iter_mut().zip(&y) {
                    hermite_table(top, v, t);
                }
                for (p, beta) in betas.iter().enumerate() {
                    // (Y, -Y) average: odd total order cancels.
                    if beta.iter().sum::<u32>() % 2 == 1 {
                        continue;
                    }
                    let h: f64 = beta.iter().enumerate().map(|(i, &b)| tables[i][b as usize]).product();
                    let v = det * h;
                    acc[p].0 += v;
                    acc[p].1 += v * v;
                }
            }
            acc
        })
        .collect();
    let nf = n as f64;
    Ok(betas
        .iter()
        .enumerate()
        .map(|(p, beta)| {
            let (s, s2) = partial.iter().fold((0.0, 0.0), |a, c| (a.0 + c[p].0, a.1 + c[p].1));
            let mean = s / nf;
            let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
            let bf = beta_factorial(beta);
            Estimate {
                value: mean / bf,
                se: (var / nf).sqrt() / bf,
            }
        })
        .collect())
}

pub fn f_coefficient(beta: &[u32], m: usize, n: usize, seed: u64) -> Result<Estimate> {
    Ok(f_coefficients(&[beta.to_vec()], m, n, seed)?[0])
}

/// The common value of the `beta_{lk} = 2` coefficients in both
/// normalizations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FTilde22 {
    /// `E[|det Y| H_2(Y_lk)] / 2`, averaged over `(l, k)`: the expansion
    /// coefficient.
    pub coefficient: Estimate,
    /// `(E[|det Y| ||Y||_F^2] - m^2 E|det Y|) / m^2`: the same average without
    /// the `1 / 2!`.
    pub frobenius: Estimate,
    /// `E|det Y|` from the same sample.
    pub mean_abs_det: Estimate,
}

/// Monte Carlo `f~_{l22}` by the Frobenius-norm identity.
pub fn f_tilde_22(m: usize, n: usize, seed: u64) -> Result<FTilde22> {
    if m == 0 || n < 2 {
        return Err(KssError::InvalidArgument("need m >= 1 and n >= 2".into()));
    }
    let mm = m * m;
    let mf = mm as f64;
    let (s, s2, d, d2) = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let mut y = vec![0.0; mm];
            let mut acc = (0.0, 0.0, 0.0, 0.0);
            for _ in 0..CHUNK.min(n - c * CHUNK) {
                for v in y.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let frob: f64 = y.iter().map(|v| v * v).sum();
                let det = det_in_place(&mut y, m).abs();
                let v = det * (frob - mf) / mf;
                acc.0 += v;
                acc.1 += v * v;
                acc.2 += det;
                acc.3 += det * det;
            }
            acc
        })
        .reduce(|| (0.0, 0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
    let nf = n as f64;
    let est = |s: f64, s2: f64| {
        let mean = s / nf;
        let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
        Estimate {
            value: mean,
            se: (var / nf).sqrt(),
        }
    };
    let frobenius = est(s, s2);
    Ok(FTilde22 {
        coefficient: Estimate {
            value: 0.5 * frobenius.value,
            se: 0.5 * frobenius.se,
        },
        frobenius,
        mean_abs_det: est(d, d2),
    })
}

/// All multi-indices over `m^2` entries with `|beta| <= order`, graded.
pub fn multi_indices(entries: usize, order: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=order {
        let mut cur = vec![0u32; entries];
        compositions(&mut cur, 0, total, &mut out);
    }
    out
}

fn compositions(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v;
        compositions(cur, pos + 1, left - v, out);
    }
    cur[pos] = 0;
}

/// Truncated Parseval sum `sum_{|beta| <= order} (f_beta^2 - se^2) beta!`,
/// with its standard error; bounded above by `E det^2 = m!`.
pub fn parseval_sum(m: usize, order: u32, n: usize, seed: u64) -> Result<Estimate> {
    let betas = multi_indices(m * m, order);
    let est = f_coefficients(&betas, m, n, seed)?;
    let mut value = 0.0;
    let mut var = 0.0;
    for (b, e) in betas.iter().zip(&est) {
        let bf = beta_factorial(b);
        value += (e.value * e.value - e.se * e.se) * bf;
        var += (2.0 * e.value * e.se * bf).powi(2);
    }
    Ok(Estimate { value, se: var.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_moments() {
        let c = (2.0 / std::f64::consts::PI).sqrt();
        let f = f_coefficients(&[vec![0], vec![2], vec![1]], 1, 400_000, 5).unwrap();
        assert!((f[0].value - c).abs() < 3.0 * f[0].se);
        assert!((f[1].value - 0.5 * c).abs() < 3.0 * f[1].se);
        assert_eq!(f[2].value, 0.0);
        let t = f_tilde_22(1, 400_000, 5).unwrap();
        assert!((t.frobenius.value - c).abs() < 3.0 * t.frobenius.se);
    }

    #[test]
    fn index_enumeration() {
        let b = multi_indices(4, 2);
        assert_eq!(b.len(), 15);
        assert_eq!(b[0], vec![0, 0, 0, 0]);
        assert!(b.iter().all(|x| x.iter().sum::<u32>() <= 2));
    }
}
