//! Exact Sturm chains over the integers.
//!
//! Floating coefficients are dyadic rationals, so after scaling by a common
//! power of two they become integers and the whole chain is exact.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Float, Signed, Zero};

/// Integer images `c_k` with `coeffs[k] = c_k * 2^e` for a common `e`.
pub fn dyadic_integers(coeffs: &[f64]) -> Vec<BigInt> {
    let decoded: Vec<(u64, i16, i8)> = coeffs.iter().map(|c| c.integer_decode()).collect();
    let min_exp = decoded
        .iter()
        .filter(|(mant, _, _)| *mant != 0)
        .map(|&(_, e, _)| e)
        .min()
        .unwrap_or(0);
    let ints: Vec<BigInt> = decoded
        .into_iter()
        .map(|(mant, e, s)| {
            if mant == 0 {
                return BigInt::zero();
            }
            let v = BigInt::from(mant) << ((e - min_exp) as usize);
            if s < 0 {
                -v
            } else {
                v
            }
        })
        .collect();
    // Drop the common power of two.
    let shift = ints.iter().filter_map(|c| c.trailing_zeros()).min().unwrap_or(0);
    ints.into_iter().map(|c| c >> shift as usize).collect()
}

fn trim(p: &mut Vec<BigInt>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn derivative(p: &[BigInt]) -> Vec<BigInt> {
    let mut d: Vec<BigInt> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigInt::from(k))
        .collect();
    trim(&mut d);
    d
}

/// A positive multiple of the remainder of `a` by `b`.
fn positive_pseudo_remainder(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let lc = &b[db];
    let mut r = a.to_vec();
    let mut steps = 0usize;
    trim(&mut r);
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let rl = r.last().unwrap().clone();
        for c in r.iter_mut() {
            *c *= lc;
        }
        for (k, bk) in b.iter().enumerate() {
            r[k + shift] -= &rl * bk;
        }
        r.pop();
        trim(&mut r);
        steps += 1;
    }
    if lc.is_negative() && steps % 2 == 1 {
        for c in r.iter_mut() {
            *c = -&*c;
        }
    }
    r
}

fn primitive(p: &mut [BigInt]) {
    let g = p.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if !g.is_zero() && g != BigInt::from(1) {
        for c in p.iter_mut() {
            *c /= &g;
        }
    }
}

fn max_bits(p: &[BigInt]) -> u64 {
    p.iter().map(|c| c.bits()).max().unwrap_or(0)
}

/// Outcome of building the chain.
pub enum SturmCount {
    Exact(usize),
    /// Some intermediate coefficient exceeded the bit budget.
    BudgetExceeded,
}

fn sign_changes(signs: impl Iterator<Item = Sign>) -> usize {
    let mut last = Sign::NoSign;
    let mut n = 0;
    for s in signs {
        if s == Sign::NoSign {
            continue;
        }
        if last != Sign::NoSign && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

/// Number of distinct real roots of the integer polynomial `p` (ascending
/// coefficients, nonzero).
pub fn count_distinct_real_roots(p: &[BigInt], bit_budget: u64) -> SturmCount {
    let mut p0 = p.to_vec();
    trim(&mut p0);
    primitive(&mut p0);
    let mut chain = vec![p0.clone()];
    let mut p1 = derivative(&p0);
    if !p1.is_empty() {
        primitive(&mut p1);
        chain.push(p1);
        loop {
            let n = chain.len();
            let mut r = positive_pseudo_remainder(&chain[n - 2], &chain[n - 1]);
            if r.is_empty() {
                break;
            }
            for c in r.iter_mut() {
                *c = -&*c;
            }
            primitive(&mut r);
            if max_bits(&r) > bit_budget {
                return SturmCount::BudgetExceeded;
            }
            chain.push(r);
        }
    }
    let at_pos_inf = chain.iter().map(|q| q.last().unwrap().sign());
    let at_neg_inf = chain.iter().map(|q| {
        let s = q.last().unwrap().sign();
        if (q.len() - 1) % 2 == 1 {
            -s
        } else {
            s
        }
    });
    SturmCount::Exact(sign_changes(at_neg_inf) - sign_changes(at_pos_inf))
}
