//! Real-root counts from Aberth approximations certified by Gerschgorin
//! inclusion discs.
//!
//! For distinct approximations `z_1..z_n` of the roots of `p` (degree `n`,
//! leading coefficient `a_n`) put `W_i = p(z_i) / (a_n prod_{j != i}(z_i - z_j))`.
//! The roots of `p` are the eigenvalues of `diag(z) - e W^T`, so by the column
//! Gerschgorin theorem they lie in the union of the discs
//! `D(z_i - W_i, (n - 1)|W_i|)` and every connected component of the union
//! holds as many roots as discs. When all discs are pairwise disjoint and the
//! approximation set is closed under conjugation, a disc centred on the real
//! axis holds exactly one root and that root is real (a non-real root would
//! drag its conjugate into the same disc).

use num_complex::Complex64 as C64;

const EPS: f64 = f64::EPSILON;

/// `p(z)`, `p'(z)` and `sum |a_k| |z|^k` by Horner, `a` ascending.
fn horner(a: &[f64], z: C64) -> (C64, C64, f64) {
    let r = z.norm();
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    let mut bound = 0.0;
    for &c in a.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        bound = bound * r + c.abs();
    }
    (p, dp, bound)
}

/// Newton correction `p(z) / p'(z)`, using the reversed polynomial outside
/// the unit disc.
fn newton_ratio(a: &[f64], rev: &[f64], z: C64) -> (C64, bool) {
    let n = (a.len() - 1) as f64;
    let (p, dp, bound, small) = if z.norm() <= 1.0 {
        let (p, dp, b) = horner(a, z);
        (p, dp, b, true)
    } else {
        let w = z.inv();
        let (q, dq, b) = horner(rev, w);
        // p(z) = z^n q(w), p'(z) = z^{n-1} (n q(w) - w q'(w))
        (q, q * n - w * dq, b, false)
    };
    let noise = p.norm() <= 8.0 * (a.len() as f64) * EPS * bound;
    let ratio = if small { p / dp } else { z * p / dp };
    (ratio, noise)
}

/// Initial points from the Newton polygon of `log |a_k|`.
fn initial_points(a: &[f64]) -> Vec<C64> {
    let n = a.len() - 1;
    let logs: Vec<f64> = a
        .iter()
        .map(|c| if *c == 0.0 { f64::NEG_INFINITY } else { c.abs().ln() })
        .collect();
    // Upper convex hull over indices with finite log.
    let mut hull: Vec<usize> = Vec::new();
    for k in 0..=n {
        if !logs[k].is_finite() {
            continue;
        }
        while hull.len() >= 2 {
            let (i, j) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (j - i) as f64 * (logs[k] - logs[i]) - (k - i) as f64 * (logs[j] - logs[i]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut pts = Vec::with_capacity(n);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        let cnt = j - i;
        let radius = ((logs[i] - logs[j]) / cnt as f64).exp();
        for t in 0..cnt {
            let ang = std::f64::consts::TAU * (t as f64 / cnt as f64 + i as f64 / n as f64) + sigma;
            pts.push(C64::from_polar(radius, ang));
        }
    }
    pts
}

/// Aberth-Ehrlich simultaneous iteration. Returns the approximations and
/// whether every one met the stopping rule.
pub fn aberth(a: &[f64], max_iter: usize) -> (Vec<C64>, bool) {
    let n = a.len() - 1;
    let rev: Vec<f64> = a.iter().rev().copied().collect();
    let mut z = initial_points(a);
    debug_assert_eq!(z.len(), n);
    let mut done = vec![false; n];
    for _ in 0..max_iter {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            all = false;
            let (ratio, noise) = newton_ratio(a, &rev, z[i]);
            if noise {
                done[i] = true;
                continue;
            }
            let zi = z[i];
            let s: C64 = z
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &zj)| (zi - zj).inv())
                .sum();
            let corr = ratio / (C64::new(1.0, 0.0) - ratio * s);
            if corr.is_finite() {
                z[i] = zi - corr;
                if corr.norm() <= 4.0 * EPS * z[i].norm() {
                    done[i] = true;
                }
            }
        }
        if all {
            return (z, true);
        }
    }
    let ok = done.iter().all(|&d| d);
    (z, ok)
}

/// Complex product kept as mantissa times a power of two.
struct ScaledProduct {
    value: C64,
    exp: i32,
}

impl ScaledProduct {
    fn new() -> Self {
        Self {
            value: C64::new(1.0, 0.0),
            exp: 0,
        }
    }

    fn mul(&mut self, x: C64) {
        self.value *= x;
        let r = self.value.norm();
        if !(1e-100..=1e100).contains(&r) && r > 0.0 && r.is_finite() {
            let e = r.log2().round() as i32;
            self.value *= 2f64.powi(-e);
            self.exp += e;
        }
    }

    /// `num / self` as an ordinary complex number.
    fn divide(&self, num: C64) -> C64 {
        (num / self.value) * 2f64.powi(-self.exp)
    }
}

/// Snaps near-real approximations onto the axis and pairs the rest with
/// their conjugates. `None` if the pairing is inconsistent.
fn symmetrize(z: &[C64]) -> Option<Vec<C64>> {
    let mut real = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for &x in z {
        if x.im.abs() <= 1e-9 * (1.0 + x.norm()) {
            real.push(C64::new(x.re, 0.0));
        } else if x.im > 0.0 {
            upper.push(x);
        } else {
            lower.push(x.conj());
        }
    }
    if upper.len() != lower.len() {
        return None;
    }
    let mut out = real;
    let mut used = vec![false; lower.len()];
    for u in upper {
        let (k, _) = lower
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, l)| (k, (u - l).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        used[k] = true;
        let c = (u + lower[k]) * 0.5;
        out.push(c);
        out.push(c.conj());
    }
    Some(out)
}

struct Disc {
    center: C64,
    radius: f64,
    real: bool,
}

fn inclusion_discs(a: &[f64], z: &[C64]) -> Option<Vec<Disc>> {
    let n = a.len() - 1;
    let an = a[n];
    let rev: Vec<f64> = a.iter().rev().copied().collect();
    let nf = n as f64;
    let mut discs = Vec::with_capacity(n);
    for (i, &zi) in z.iter().enumerate() {
        let mut prod = ScaledProduct::new();
        let (w, werr) = if zi.norm() <= 1.0 {
            let (p, _, bound) = horner(a, zi);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    prod.mul(zi - zj);
                }
            }
            let w = prod.divide(p / an);
            let err = prod.divide(C64::new(8.0 * (nf + 1.0) * EPS * bound / an.abs(), 0.0)).norm();
            (w, err)
        } else {
            let wv = zi.inv();
            let (q, _, bound) = horner(&rev, wv);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    prod.mul(C64::new(1.0, 0.0) - zj * wv);
                }
            }
            let w = prod.divide(zi * q / an);
            let err = prod
                .divide(C64::new(8.0 * (nf + 2.0) * EPS * bound * zi.norm() / an.abs(), 0.0))
                .norm();
            (w, err)
        };
        if !w.is_finite() || !werr.is_finite() {
            return None;
        }
        // Rounding in the product and the divisions.
        let werr = werr + 8.0 * (nf + 2.0) * EPS * w.norm();
        let real = zi.im == 0.0;
        let mut center = zi - w;
        let mut radius = (nf - 1.0) * (w.norm() + werr) + werr;
        if real {
            radius += center.im.abs();
            center.im = 0.0;
        }
        radius = radius * (1.0 + 1e-12) + EPS * center.norm();
        discs.push(Disc { center, radius, real });
    }
    Some(discs)
}

/// Certified number of real roots, or `None` when the discs are not
/// isolated (clustered or badly converged roots).
pub fn certified_real_count(a: &[f64]) -> Option<usize> {
    let n = a.len() - 1;
    if n == 0 {
        return Some(0);
    }
    let (z, _) = aberth(a, 300);
    let z = symmetrize(&z)?;
    let discs = inclusion_discs(a, &z)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        (discs[i].center.re - discs[i].radius).total_cmp(&(discs[j].center.re - discs[j].radius))
    });
    // Sweep by left edge so the pairwise check is cheap in practice.
    for (p, &i) in order.iter().enumerate() {
        let right = discs[i].center.re + discs[i].radius;
        for &j in &order[p + 1..] {
            if discs[j].center.re - discs[j].radius > right {
                break;
            }
            let gap = (discs[i].center - discs[j].center).norm();
            if gap <= discs[i].radius + discs[j].radius {
                return None;
            }
        }
    }
    Some(discs.iter().filter(|d| d.real).count())
}

/// Uncertified estimate: approximations within a small band of the axis.
pub fn approximate_real_count(a: &[f64]) -> usize {
    let (z, _) = aberth(a, 300);
    z.iter()
        .filter(|x| x.im.abs() <= 1e-7 * (1.0 + x.norm()))
        .count()
}
