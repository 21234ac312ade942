//! Verified root counting for square homogeneous systems on the sphere.
//!
//! Each antipodal pair of zeros of `Y` has a representative whose largest
//! coordinate (in absolute value) is positive. Dehomogenizing at that
//! coordinate gives a zero of a chart system on `[-1, 1]^m`. The `m + 1`
//! charts are searched by bisection; a cell is discarded when an interval
//! enclosure of `Y` excludes zero and accepted when the Krawczyk operator
//! maps it into its own interior (existence and uniqueness). Zeros found in
//! several charts are merged by their distance as projective points.

use crate::kss::{Form, System};
use crate::numerics::Interval;

type IVec = Vec<Interval>;

#[derive(Clone, Debug)]
struct ChartPoly {
    terms: Vec<(f64, Vec<u32>)>,
}

impl ChartPoly {
    fn derivative(&self, k: usize) -> ChartPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[k] > 0)
            .map(|(c, e)| {
                let mut e2 = e.clone();
                e2[k] -= 1;
                (c * e[k] as f64, e2)
            })
            .collect();
        ChartPoly { terms }
    }

    fn eval(&self, pw: &[Vec<f64>]) -> f64 {
        self.terms.iter().fold(0.0, |acc, (c, e)| {
            acc + c * e
                .iter()
                .enumerate()
                .fold(1.0, |p, (k, &ek)| p * pw[k][ek as usize])
        })
    }

    fn eval_interval(&self, pw: &[Vec<Interval>]) -> Interval {
        self.terms.iter().fold(Interval::point(0.0), |acc, (c, e)| {
            let mono = e
                .iter()
                .enumerate()
                .fold(Interval::point(1.0), |p, (k, &ek)| p * pw[k][ek as usize]);
            acc + mono * *c
        })
    }
}

struct Chart {
    face: usize,
    sign: f64,
    eqs: Vec<ChartPoly>,
    jac: Vec<Vec<ChartPoly>>,
    d: usize,
}

impl Chart {
    fn new(y: &System<f64>, face: usize, sign: f64) -> Self {
        let m = y.m();
        let d = y.d();
        let eqs: Vec<ChartPoly> = (0..m)
            .map(|l| {
                let terms = y
                    .equation(l)
                    .iter()
                    .zip(y.monomials())
                    .filter(|(c, _)| **c != 0.0)
                    .map(|(&c, j)| {
                        let h = j.to_homogeneous();
                        let e = h.exponents();
                        let s = if e[face] % 2 == 1 { sign } else { 1.0 };
                        let rest: Vec<u32> = e
                            .iter()
                            .enumerate()
                            .filter(|(k, _)| *k != face)
                            .map(|(_, &x)| x)
                            .collect();
                        (c * s, rest)
                    })
                    .collect();
                ChartPoly { terms }
            })
            .collect();
        let jac = eqs
            .iter()
            .map(|p| (0..m).map(|k| p.derivative(k)).collect())
            .collect();
        Self {
            face,
            sign,
            eqs,
            jac,
            d: d as usize,
        }
    }

    fn point_powers(&self, u: &[f64]) -> Vec<Vec<f64>> {
        u.iter()
            .map(|&x| {
                let mut v = Vec::with_capacity(self.d + 1);
                let mut acc = 1.0;
                for _ in 0..=self.d {
                    v.push(acc);
                    acc *= x;
                }
                v
            })
            .collect()
    }

    fn interval_powers(&self, x: &[Interval]) -> Vec<Vec<Interval>> {
        x.iter()
            .map(|xi| (0..=self.d as u32).map(|k| xi.powi(k)).collect())
            .collect()
    }

    fn f(&self, u: &[f64]) -> Vec<f64> {
        let pw = self.point_powers(u);
        self.eqs.iter().map(|p| p.eval(&pw)).collect()
    }

    fn jacobian(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let pw = self.point_powers(u);
        self.jac
            .iter()
            .map(|row| row.iter().map(|p| p.eval(&pw)).collect())
            .collect()
    }

    fn f_interval(&self, x: &[Interval]) -> IVec {
        let pw = self.interval_powers(x);
        self.eqs.iter().map(|p| p.eval_interval(&pw)).collect()
    }

    /// Rigorous enclosure of `F` at a floating point.
    fn f_at(&self, u: &[f64]) -> IVec {
        let x: IVec = u.iter().map(|&v| Interval::point(v)).collect();
        self.f_interval(&x)
    }

    fn jac_interval(&self, x: &[Interval]) -> Vec<IVec> {
        let pw = self.interval_powers(x);
        self.jac
            .iter()
            .map(|row| row.iter().map(|p| p.eval_interval(&pw)).collect())
            .collect()
    }

    /// Ambient unit vector for a chart point.
    fn lift(&self, u: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(u.len() + 1);
        x.extend_from_slice(&u[..self.face]);
        x.push(self.sign);
        x.extend_from_slice(&u[self.face..]);
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter().map(|v| v / n).collect()
    }
}

fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 || !m[piv][col].is_finite() {
            return None;
        }
        m.swap(col, piv);
        let p = m[col][col];
        m[col].iter_mut().for_each(|v| *v /= p);
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn widest(x: &[Interval]) -> (usize, f64) {
    x.iter()
        .enumerate()
        .map(|(k, v)| (k, v.width()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

fn subset(a: &[Interval], b: &[Interval]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.subset_of(y))
}

enum Krawczyk {
    /// `K(X)` lies in the interior of `X`: a unique zero, enclosed by `K`.
    Unique(IVec),
    /// `K(X)` misses `X`: no zero.
    Empty,
    /// Inconclusive; `X ∩ K(X)` still holds every zero of `X`.
    Narrowed(IVec),
    Singular,
}

fn krawczyk(chart: &Chart, x: &[Interval]) -> Krawczyk {
    let m = x.len();
    let c: Vec<f64> = x.iter().map(|v| v.mid()).collect();
    let jx = chart.jac_interval(x);
    let jmid: Vec<Vec<f64>> = jx.iter().map(|r| r.iter().map(|v| v.mid()).collect()).collect();
    let Some(yinv) = invert(&jmid) else {
        return Krawczyk::Singular;
    };
    let fc = chart.f_at(&c);
    let dx: IVec = x.iter().zip(&c).map(|(v, &ci)| *v - Interval::point(ci)).collect();
    let mut k = Vec::with_capacity(m);
    for i in 0..m {
        let mut acc = Interval::point(c[i]);
        for j in 0..m {
            acc = acc - fc[j] * yinv[i][j];
        }
        for j in 0..m {
            // (I - Y J(X))_{ij}
            let mut e = Interval::point(if i == j { 1.0 } else { 0.0 });
            for l in 0..m {
                e = e - jx[l][j] * yinv[i][l];
            }
            acc = acc + e * dx[j];
        }
        k.push(acc);
    }
    if k.iter().any(|v| !v.lo().is_finite() || !v.hi().is_finite()) {
        return Krawczyk::Singular;
    }
    if k.iter().zip(x).all(|(kv, xv)| kv.interior_of(xv)) {
        return Krawczyk::Unique(k);
    }
    let mut narrowed = Vec::with_capacity(m);
    for (kv, xv) in k.iter().zip(x) {
        match kv.intersect(xv) {
            Some(v) => narrowed.push(v),
            None => return Krawczyk::Empty,
        }
    }
    Krawczyk::Narrowed(narrowed)
}

/// Iterates the Krawczyk operator on an enclosure of a verified zero until
/// it stops shrinking. Every iterate still contains the zero.
fn tighten(chart: &Chart, mut k: IVec) -> IVec {
    let width = |v: &[Interval]| widest(v).1;
    for _ in 0..40 {
        let next = match krawczyk(chart, &k) {
            Krawczyk::Unique(n) => n.iter().zip(&k).map(|(a, b)| a.intersect(b)).collect::<Option<IVec>>(),
            Krawczyk::Narrowed(n) => Some(n),
            Krawczyk::Empty | Krawczyk::Singular => None,
        };
        match next {
            Some(n) if width(&n) < 0.5 * width(&k) => k = n,
            Some(n) => return n,
            None => return k,
        }
    }
    k
}

fn excludes_zero(chart: &Chart, x: &[Interval]) -> bool {
    let nat = chart.f_interval(x);
    if nat.iter().any(|v| !v.contains_zero()) {
        return true;
    }
    // Mean-value form F(c) + J(X)(X - c).
    let c: Vec<f64> = x.iter().map(|v| v.mid()).collect();
    let fc = chart.f_at(&c);
    let jx = chart.jac_interval(x);
    fc.iter().enumerate().any(|(l, f)| {
        let mv = x
            .iter()
            .zip(&c)
            .zip(&jx[l])
            .fold(*f, |acc, ((xv, &ci), j)| acc + *j * (*xv - Interval::point(ci)));
        mv.intersect(&nat[l]).is_none_or(|v| !v.contains_zero())
    })
}

fn newton(chart: &Chart, start: &[f64], iters: usize) -> Option<Vec<f64>> {
    let mut u = start.to_vec();
    for _ in 0..iters {
        let f = chart.f(&u);
        let j = invert(&chart.jacobian(&u))?;
        let step: Vec<f64> = (0..u.len())
            .map(|i| (0..u.len()).map(|k| j[i][k] * f[k]).sum())
            .collect();
        u.iter_mut().zip(&step).for_each(|(a, s)| *a -= s);
        if step.iter().map(|s| s.abs()).fold(0.0, f64::max) < 1e-15 {
            break;
        }
        if u.iter().any(|v| !v.is_finite() || v.abs() > 10.0) {
            return None;
        }
    }
    Some(u)
}

/// Tuning for [`count_homogeneous`].
#[derive(Clone, Debug)]
pub struct SubdivisionOptions {
    /// Cells narrower than this are given up as unresolved.
    pub min_width: f64,
    /// Cell budget per chart.
    pub max_cells: usize,
    /// Chart boxes are `[-1 - overlap, 1 + overlap]^m`.
    pub overlap: f64,
    /// Projective distance below which two verified zeros are the same.
    pub merge_tolerance: f64,
    /// Verified zeros with `|x0|` below this count as zeros at infinity.
    pub equator_tolerance: f64,
    /// Search the charts `x_i = -1` instead of `x_i = +1`.
    pub negative_faces: bool,
}

impl Default for SubdivisionOptions {
    fn default() -> Self {
        Self {
            min_width: 1e-8,
            max_cells: 20_000,
            overlap: 1e-10,
            merge_tolerance: 1e-7,
            equator_tolerance: 1e-12,
            negative_faces: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SubdivisionOutcome {
    /// Verified zeros on the sphere, one per antipodal pair.
    pub zeros: Vec<Vec<f64>>,
    pub unresolved: usize,
    pub equator_hits: usize,
    pub cells: usize,
}

struct Verified {
    uniqueness: IVec,
    enclosure: IVec,
}

fn search_chart(chart: &Chart, m: usize, opts: &SubdivisionOptions) -> (Vec<Vec<f64>>, usize, usize) {
    let r = 1.0 + opts.overlap;
    let mut stack: Vec<IVec> = vec![vec![Interval::new(-r, r); m]];
    let mut verified: Vec<Verified> = Vec::new();
    let mut unresolved = 0usize;
    let mut cells = 0usize;
    let record = |uniq: IVec, enc: IVec, verified: &mut Vec<Verified>| {
        let enc = tighten(chart, enc);
        let dup = verified.iter().any(|v| {
            subset(&enc, &v.uniqueness)
                || subset(&v.enclosure, &uniq)
                || enc.iter().zip(&v.enclosure).all(|(a, b)| a.intersect(b).is_some())
        });
        if !dup {
            verified.push(Verified {
                uniqueness: uniq,
                enclosure: enc,
            });
        }
    };
    while let Some(mut x) = stack.pop() {
        cells += 1;
        if cells > opts.max_cells {
            unresolved += stack.len() + 1;
            break;
        }
        if verified.iter().any(|v| subset(&x, &v.uniqueness)) {
            continue;
        }
        if excludes_zero(chart, &x) {
            continue;
        }
        match krawczyk(chart, &x) {
            Krawczyk::Empty => continue,
            Krawczyk::Unique(k) => {
                record(x, k, &mut verified);
                continue;
            }
            Krawczyk::Narrowed(nx) => x = nx,
            Krawczyk::Singular => {}
        }
        let (axis, w) = widest(&x);
        // Zeros on or near a cell face: inflate a box around a Newton limit.
        if w < 0.05 {
            let c: Vec<f64> = x.iter().map(|v| v.mid()).collect();
            if let Some(u) = newton(chart, &c, 8) {
                let near = u
                    .iter()
                    .zip(&x)
                    .all(|(ui, xi)| (ui - xi.mid()).abs() <= xi.width());
                if near {
                    let rad = (0.1 * w).max(1e-12 * (1.0 + u.iter().fold(0.0f64, |a, b| a.max(b.abs()))));
                    let b: IVec = u.iter().map(|&ui| Interval::centered(ui, rad + 0.5 * w)).collect();
                    if let Krawczyk::Unique(k) = krawczyk(chart, &b) {
                        let covers = subset(&x, &b);
                        record(b, k, &mut verified);
                        if covers {
                            continue;
                        }
                    }
                }
            }
        }
        if w < opts.min_width {
            unresolved += 1;
            continue;
        }
        let (lo, hi) = x[axis].bisect();
        let mut a = x.clone();
        let mut b = x;
        a[axis] = lo;
        b[axis] = hi;
        stack.push(b);
        stack.push(a);
    }
    let zeros = verified
        .iter()
        .map(|v| {
            let mid: Vec<f64> = v.enclosure.iter().map(|i| i.mid()).collect();
            chart.lift(&mid)
        })
        .collect();
    (zeros, unresolved, cells)
}

fn projective_distance(a: &[f64], b: &[f64]) -> f64 {
    let dm: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let dp: f64 = a.iter().zip(b).map(|(x, y)| (x + y).powi(2)).sum();
    dm.min(dp).sqrt()
}

/// Verified zeros of a homogeneous system, one per antipodal pair.
pub fn count_homogeneous(y: &System<f64>, opts: &SubdivisionOptions) -> SubdivisionOutcome {
    debug_assert_eq!(y.form(), Form::Homogeneous);
    let m = y.m();
    let sign = if opts.negative_faces { -1.0 } else { 1.0 };
    let mut out = SubdivisionOutcome::default();
    for face in 0..=m {
        let chart = Chart::new(y, face, sign);
        let (zeros, unresolved, cells) = search_chart(&chart, m, opts);
        out.unresolved += unresolved;
        out.cells += cells;
        for z in zeros {
            if !out
                .zeros
                .iter()
                .any(|w| projective_distance(w, &z) < opts.merge_tolerance)
            {
                out.zeros.push(z);
            }
        }
    }
    out.equator_hits = out
        .zeros
        .iter()
        .filter(|z| z[0].abs() < opts.equator_tolerance)
        .count();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_small_matrix() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let b = invert(&a).unwrap();
        assert!((b[0][0] - 0.6).abs() < 1e-15 && (b[0][1] + 0.2).abs() < 1e-15);
        assert!(invert(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_none());
    }

    #[test]
    fn product_system_has_four_zeros() {
        let mut p = System::<f64>::zeros(2, 2).unwrap();
        p.set(0, &[0, 0], -1.0).unwrap();
        p.set(0, &[2, 0], 1.0).unwrap();
        p.set(1, &[0, 0], -1.0).unwrap();
        p.set(1, &[0, 2], 1.0).unwrap();
        let out = count_homogeneous(&p.homogenize(), &SubdivisionOptions::default());
        assert_eq!(out.zeros.len(), 4);
        assert_eq!(out.unresolved, 0);
        assert_eq!(out.equator_hits, 0);
    }
}
