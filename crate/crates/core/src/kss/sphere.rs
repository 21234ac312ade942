use crate::error::{KssError, Result};
use crate::scalar::Scalar;

/// A unit vector of `R^{m+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePoint<T> {
    coords: Vec<T>,
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

impl<T: Scalar> SpherePoint<T> {
    /// Checks that `coords` has unit norm.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        let n = norm(&coords);
        if coords.len() < 2 || (n - T::one()).abs() > T::unit_tolerance() {
            return Err(KssError::NonUnitPoint(n.to_f64_lossy()));
        }
        Ok(Self { coords })
    }

    /// Radial projection of a nonzero vector.
    pub fn normalize(mut coords: Vec<T>) -> Result<Self> {
        let n = norm(&coords);
        if coords.len() < 2 || !(n > T::zero()) || !n.is_finite() {
            return Err(KssError::NonUnitPoint(n.to_f64_lossy()));
        }
        for c in &mut coords {
            *c = *c / n;
        }
        Ok(Self { coords })
    }

    /// Canonical basis vector `e_i` of `R^{m+1}`.
    pub fn basis(m: usize, i: usize) -> Self {
        let mut coords = vec![T::zero(); m + 1];
        coords[i] = T::one();
        Self { coords }
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Dimension `m` of the sphere.
    pub fn m(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn dot(&self, other: &Self) -> T {
        dot(&self.coords, &other.coords)
    }

    pub fn antipode(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|&c| -c).collect(),
        }
    }

    /// Orthonormal basis of the tangent space `t^perp`, from the Householder
    /// reflection that sends the point to a multiple of `e0`.
    pub fn tangent_basis(&self) -> Vec<Vec<T>> {
        let p = &self.coords;
        let n = p.len();
        let sign = if p[0] >= T::zero() { T::one() } else { -T::one() };
        let mut v = p.clone();
        v[0] = v[0] + sign;
        let vv = dot(&v, &v);
        let two = T::of(2.0);
        (1..n)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        let delta = if i == k { T::one() } else { T::zero() };
                        delta - two * v[i] * v[k] / vv
                    })
                    .collect()
            })
            .collect()
    }
}

/// `r_d(s, t) = <s, t>^d`, the covariance of each homogeneous KSS component
/// on the sphere.
pub fn covariance<T: Scalar>(s: &SpherePoint<T>, t: &SpherePoint<T>, d: u32) -> Result<T> {
    if s.m() != t.m() {
        return Err(KssError::InvalidArgument(format!(
            "points live on spheres of dimension {} and {}",
            s.m(),
            t.m()
        )));
    }
    Ok(s.dot(t).powi(d as i32))
}

/// Tangent frames at a pair of points, rotated so that the pair looks like
/// `s = e0`, `t = cos(psi) e0 + sin(psi) e1`.
///
/// At `s` the frame is `{f1, f2, ..., fm}`; at `t` it is
/// `{-sin(psi) s + cos(psi) f1, f2, ..., fm}`. The first vector at `t` is the
/// image of `f1` under the rotation taking `s` to `t`, which is the choice
/// that makes the derivative cross-covariance equal to `B` (not `-B`).
#[derive(Clone, Debug)]
pub struct PairFrame<T> {
    pub psi: T,
    pub at_s: Vec<Vec<T>>,
    pub at_t: Vec<Vec<T>>,
}

impl<T: Scalar> PairFrame<T> {
    pub fn new(s: &SpherePoint<T>, t: &SpherePoint<T>) -> Result<Self> {
        let m = s.m();
        if t.m() != m {
            return Err(KssError::InvalidArgument("dimension mismatch".into()));
        }
        let c = s.dot(t);
        let mut f1: Vec<T> = t
            .coords
            .iter()
            .zip(&s.coords)
            .map(|(&ti, &si)| ti - c * si)
            .collect();
        let sn = norm(&f1);
        let psi = sn.atan2(c);
        let tol = T::epsilon().sqrt();
        if sn > tol {
            f1.iter_mut().for_each(|x| *x = *x / sn);
        } else {
            f1 = s.tangent_basis().swap_remove(0);
        }
        let mut at_s = vec![f1.clone()];
        for cand in s.tangent_basis() {
            if at_s.len() == m {
                break;
            }
            let mut v = cand;
            for _ in 0..2 {
                for u in &at_s {
                    let p = dot(&v, u);
                    v.iter_mut().zip(u).for_each(|(x, &y)| *x = *x - p * y);
                }
            }
            let n = norm(&v);
            if n > T::of(1e-3) {
                v.iter_mut().for_each(|x| *x = *x / n);
                at_s.push(v);
            }
        }
        let (sp, cp) = psi.sin_cos();
        let mut at_t = at_s.clone();
        at_t[0] = s
            .coords
            .iter()
            .zip(&f1)
            .map(|(&si, &fi)| -sp * si + cp * fi)
            .collect();
        Ok(Self { psi, at_s, at_t })
    }
}
