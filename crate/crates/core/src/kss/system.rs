use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::multi_index::{graded_lex, Form, MultiIndex};
use super::sphere::{dot, SpherePoint};
use crate::error::{KssError, Result};
use crate::rng::keyed_normal;
use crate::scalar::Scalar;

/// A square system of `m` polynomials of degree `d` in `m` variables.
///
/// Coefficients are stored densely, equation-major, each equation in the
/// [`graded_lex`] order of its affine multi-indices. The homogeneous form
/// shares the storage: index `j` stands for `t0^{d-|j|} t^j`.
#[derive(Clone, Debug)]
pub struct System<T> {
    m: usize,
    d: u32,
    form: Form,
    seed: u64,
    monomials: Arc<Vec<MultiIndex>>,
    coeffs: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    m: usize,
    d: u32,
    form: Form,
    seed: u64,
    coefficients: Vec<f64>,
}

fn check_shape(m: usize, d: u32) -> Result<()> {
    if m == 0 {
        return Err(KssError::InvalidDimension { got: 0, min: 1 });
    }
    if d <= 1 {
        return Err(KssError::InvalidDegree(d as u64));
    }
    Ok(())
}

impl<T: Scalar> System<T> {
    /// Draws a KSS system: coefficient `(l, j)` is centered Gaussian with
    /// variance `d! / (j! (d - |j|)!)`. The deviate for `(l, j)` is keyed by
    /// `(seed, l, rank of j)`, so the same seed always reproduces the same
    /// system.
    pub fn sample(m: usize, d: u32, seed: u64) -> Result<Self> {
        check_shape(m, d)?;
        let monomials = graded_lex(m, d);
        let sd: Vec<f64> = monomials.iter().map(|j| j.multinomial_weight().sqrt()).collect();
        if sd.iter().any(|w| !w.is_finite()) {
            return Err(KssError::Overflow(d as u64));
        }
        let mut coeffs = Vec::with_capacity(m * monomials.len());
        for l in 0..m {
            for (r, s) in sd.iter().enumerate() {
                coeffs.push(T::of(s * keyed_normal(seed, l as u64, r as u64)));
            }
        }
        Ok(Self {
            m,
            d,
            form: Form::Affine,
            seed,
            monomials: Arc::new(monomials),
            coeffs,
        })
    }

    /// All-zero affine system, to be filled with [`System::set`].
    pub fn zeros(m: usize, d: u32) -> Result<Self> {
        check_shape(m, d)?;
        let monomials = graded_lex(m, d);
        let coeffs = vec![T::zero(); m * monomials.len()];
        Ok(Self {
            m,
            d,
            form: Form::Affine,
            seed: 0,
            monomials: Arc::new(monomials),
            coeffs,
        })
    }

    pub fn from_coefficients(m: usize, d: u32, form: Form, seed: u64, coeffs: Vec<T>) -> Result<Self> {
        check_shape(m, d)?;
        let monomials = graded_lex(m, d);
        if coeffs.len() != m * monomials.len() {
            return Err(KssError::InvalidSystem(format!(
                "expected {} coefficients for m={m}, d={d}, got {}",
                m * monomials.len(),
                coeffs.len()
            )));
        }
        Ok(Self {
            m,
            d,
            form,
            seed,
            monomials: Arc::new(monomials),
            coeffs,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Affine multi-indices in storage order.
    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    pub fn terms_per_equation(&self) -> usize {
        self.monomials.len()
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coeffs
    }

    pub fn equation(&self, l: usize) -> &[T] {
        let n = self.monomials.len();
        &self.coeffs[l * n..(l + 1) * n]
    }

    pub fn rank_of(&self, affine_exponents: &[u32]) -> Option<usize> {
        self.monomials
            .iter()
            .position(|j| j.exponents() == affine_exponents)
    }

    /// Sets the coefficient of `t^j` (affine exponents) in equation `l`.
    pub fn set(&mut self, l: usize, affine_exponents: &[u32], value: T) -> Result<()> {
        let r = self.rank_of(affine_exponents).ok_or_else(|| {
            KssError::InvalidArgument(format!("no monomial {affine_exponents:?} at degree {}", self.d))
        })?;
        let n = self.monomials.len();
        self.coeffs[l * n + r] = value;
        Ok(())
    }

    /// The same coefficients read as a homogeneous system in `(t0, t)`.
    pub fn homogenize(&self) -> Self {
        Self {
            form: Form::Homogeneous,
            ..self.clone()
        }
    }

    pub fn dehomogenize(&self) -> Self {
        Self {
            form: Form::Affine,
            ..self.clone()
        }
    }

    fn require(&self, form: Form) -> Result<()> {
        if self.form != form {
            return Err(KssError::WrongForm {
                expected: form.name(),
            });
        }
        Ok(())
    }

    fn powers(&self, x: &[T]) -> Vec<Vec<T>> {
        x.iter()
            .map(|&xi| {
                let mut p = Vec::with_capacity(self.d as usize + 1);
                let mut acc = T::one();
                for _ in 0..=self.d {
                    p.push(acc);
                    acc = acc * xi;
                }
                p
            })
            .collect()
    }

    /// `P(t)` for `t` in `R^m`.
    ///
    /// For `m = 1` this is compensated Horner: the result is as accurate as
    /// if computed in twice the working precision and then rounded, i.e.
    /// relative error about `eps + cond(p, t) eps^2`. For `m >= 2` the
    /// monomials are summed naively from precomputed powers, with the usual
    /// `O(n_terms eps)` bound relative to `sum |a_j t^j|`.
    pub fn eval_affine(&self, t: &[T]) -> Result<Vec<T>> {
        self.require(Form::Affine)?;
        if t.len() != self.m {
            return Err(KssError::InvalidArgument(format!(
                "expected {} coordinates, got {}",
                self.m,
                t.len()
            )));
        }
        if self.m == 1 {
            return Ok(vec![compensated_horner(self.equation(0), t[0])]);
        }
        let pw = self.powers(t);
        Ok((0..self.m)
            .map(|l| {
                self.equation(l)
                    .iter()
                    .zip(self.monomials.iter())
                    .fold(T::zero(), |acc, (&a, j)| {
                        let mono = j
                            .exponents()
                            .iter()
                            .enumerate()
                            .fold(T::one(), |p, (k, &e)| p * pw[k][e as usize]);
                        acc + a * mono
                    })
            })
            .collect())
    }

    fn check_homogeneous_point(&self, x: &[T]) -> Result<()> {
        self.require(Form::Homogeneous)?;
        if x.len() != self.m + 1 {
            return Err(KssError::InvalidArgument(format!(
                "expected {} coordinates, got {}",
                self.m + 1,
                x.len()
            )));
        }
        Ok(())
    }

    /// `Y(x)` for any `x` in `R^{m+1}` (not necessarily unit).
    pub fn eval_homogeneous(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_homogeneous_point(x)?;
        let pw = self.powers(x);
        Ok((0..self.m)
            .map(|l| {
                self.equation(l)
                    .iter()
                    .zip(self.monomials.iter())
                    .fold(T::zero(), |acc, (&a, j)| {
                        acc + a * self.homogeneous_monomial(&pw, j, None)
                    })
            })
            .collect())
    }

    // t0^{d-|j|} t^j, or its partial derivative in variable `wrt`.
    fn homogeneous_monomial(&self, pw: &[Vec<T>], j: &MultiIndex, wrt: Option<usize>) -> T {
        let e0 = self.d - j.affine_degree();
        let exps = std::iter::once(e0).chain(j.exponents().iter().copied());
        let mut acc = T::one();
        for (k, e) in exps.enumerate() {
            if Some(k) == wrt {
                if e == 0 {
                    return T::zero();
                }
                acc = acc * T::of_u64(e as u64) * pw[k][e as usize - 1];
            } else {
                acc = acc * pw[k][e as usize];
            }
        }
        acc
    }

    /// Euclidean gradient of each `Y_l` in `R^{m+1}`: row `l` is `grad Y_l(x)`.
    pub fn free_gradient(&self, x: &[T]) -> Result<Vec<Vec<T>>> {
        self.check_homogeneous_point(x)?;
        let pw = self.powers(x);
        Ok((0..self.m)
            .map(|l| {
                (0..=self.m)
                    .map(|k| {
                        self.equation(l)
                            .iter()
                            .zip(self.monomials.iter())
                            .fold(T::zero(), |acc, (&a, j)| {
                                acc + a * self.homogeneous_monomial(&pw, j, Some(k))
                            })
                    })
                    .collect()
            })
            .collect())
    }

    /// Spherical gradient: each row of the free gradient projected onto the
    /// tangent space at `p`, in ambient coordinates. With `scaled` the rows
    /// are divided by `sqrt(d)`.
    pub fn spherical_gradient(&self, p: &SpherePoint<T>, scaled: bool) -> Result<Vec<Vec<T>>> {
        let x = p.coords();
        let g = self.free_gradient(x)?;
        let s = if scaled {
            T::one() / T::of_u64(self.d as u64).sqrt()
        } else {
            T::one()
        };
        Ok(g
            .into_iter()
            .map(|row| {
                let c = dot(&row, x);
                row.iter().zip(x).map(|(&r, &xi)| (r - c * xi) * s).collect()
            })
            .collect())
    }

    /// `m x m` matrix of spherical derivatives, entry `(l, k)` being the
    /// derivative of `Y_l` along `basis[k]`.
    pub fn spherical_gradient_in(
        &self,
        p: &SpherePoint<T>,
        basis: &[Vec<T>],
        scaled: bool,
    ) -> Result<Vec<Vec<T>>> {
        let g = self.spherical_gradient(p, scaled)?;
        Ok(g
            .iter()
            .map(|row| basis.iter().map(|b| dot(row, b)).collect())
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        let js = SystemJson {
            m: self.m,
            d: self.d,
            form: self.form,
            seed: self.seed,
            coefficients: self.coeffs.iter().map(|c| c.to_f64_lossy()).collect(),
        };
        Ok(serde_json::to_string(&js)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let js: SystemJson = serde_json::from_str(s)?;
        let coeffs = js.coefficients.into_iter().map(T::of).collect();
        Self::from_coefficients(js.m, js.d, js.form, js.seed, coeffs)
    }
}

#[inline]
fn two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// Compensated Horner evaluation of `sum_k a[k] x^k`.
pub fn compensated_horner<T: Scalar>(a: &[T], x: T) -> T {
    let Some((&top, rest)) = a.split_last() else {
        return T::zero();
    };
    let mut s = top;
    let mut c = T::zero();
    for &ak in rest.iter().rev() {
        let p = s * x;
        let pe = s.mul_add(x, -p);
        let (sn, se) = two_sum(p, ak);
        s = sn;
        c = c.mul_add(x, pe + se);
    }
    s + c
}
