//! Independent root-count oracles shared by integration tests.
#![allow(dead_code)]

use kss_core::kss::System;
use nalgebra::DMatrix;

/// Real roots of `sum_k a[k] t^k` as companion-matrix eigenvalues whose
/// imaginary part is below `tol * max(1, |lambda|)`.
pub fn companion_real_roots(a: &[f64], tol: f64) -> Vec<f64> {
    let mut a = a.to_vec();
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    while a.len() > 1 && a.last().unwrap().abs() <= 1e-14 * scale {
        a.pop();
    }
    let n = a.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = a[n];
    let c = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -a[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut roots: Vec<f64> = c
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() < tol * z.norm().max(1.0))
        .map(|z| z.re)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len().max(b.len()))
        .map(|i| a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0))
        .collect()
}

fn eval(a: &[f64], x: f64) -> f64 {
    a.iter().rev().fold(0.0, |s, c| s * x + c)
}

/// Real solutions of an affine `m = 2`, `d = 2` system by eliminating `t2`
/// with the Sylvester resultant, then lifting and checking residuals.
pub fn resultant_count_2x2(sys: &System<f64>) -> usize {
    assert!(sys.m() == 2 && sys.d() == 2);
    let c = |l: usize, j1: u32, j2: u32| sys.equation(l)[sys.rank_of(&[j1, j2]).unwrap()];
    // Coefficients of t2^2, t2, 1 as polynomials in t1.
    let parts = |l| {
        (
            vec![c(l, 0, 2)],
            vec![c(l, 0, 1), c(l, 1, 1)],
            vec![c(l, 0, 0), c(l, 1, 0), c(l, 2, 0)],
        )
    };
    let (a2, a1, a0) = parts(0);
    let (b2, b1, b0) = parts(1);
    let u = poly_sub(&poly_mul(&a2, &b0), &poly_mul(&a0, &b2));
    let v = poly_sub(&poly_mul(&a2, &b1), &poly_mul(&a1, &b2));
    let w = poly_sub(&poly_mul(&a1, &b0), &poly_mul(&a0, &b1));
    let res = poly_sub(&poly_mul(&u, &u), &poly_mul(&v, &w));
    let mut roots = companion_real_roots(&res, 1e-7);
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-9 * x.abs().max(1.0));
    roots
        .into_iter()
        .filter(|&t1| {
            // b2 p - a2 q is linear in t2.
            let t2 = -eval(&u, t1) / eval(&v, t1);
            let r = sys.eval_affine(&[t1, t2]).unwrap();
            let scale = 1.0 + t1 * t1 + t2 * t2;
            t2.is_finite() && r.iter().all(|x| x.abs() < 1e-6 * scale * 10.0)
        })
        .count()
}
