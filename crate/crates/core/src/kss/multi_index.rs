use serde::{Deserialize, Serialize};

use crate::error::{KssError, Result};
use crate::numerics::special::binomial;

/// Whether a system (or index) is written in the `m` affine variables or in
/// the `m + 1` homogeneous ones with the extra variable `t0` first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Affine,
    Homogeneous,
}

impl Form {
    pub fn name(self) -> &'static str {
        match self {
            Form::Affine => "affine",
            Form::Homogeneous => "homogeneous",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exponents: Vec<u32>,
    degree_bound: u32,
    form: Form,
}

impl MultiIndex {
    /// Affine index `j` with `|j| <= d`.
    pub fn affine(exponents: Vec<u32>, d: u32) -> Result<Self> {
        let total: u64 = exponents.iter().map(|&e| e as u64).sum();
        if exponents.is_empty() {
            return Err(KssError::InvalidDimension { got: 0, min: 1 });
        }
        if total > d as u64 {
            return Err(KssError::InvalidArgument(format!(
                "affine index {exponents:?} exceeds degree {d}"
            )));
        }
        Ok(Self {
            exponents,
            degree_bound: d,
            form: Form::Affine,
        })
    }

    /// Homogeneous index `(j0, j1, ..., jm)` with `|j| = d`.
    pub fn homogeneous(exponents: Vec<u32>, d: u32) -> Result<Self> {
        let total: u64 = exponents.iter().map(|&e| e as u64).sum();
        if exponents.len() < 2 {
            return Err(KssError::InvalidDimension {
                got: exponents.len().saturating_sub(1),
                min: 1,
            });
        }
        if total != d as u64 {
            return Err(KssError::InvalidArgument(format!(
                "homogeneous index {exponents:?} does not have degree {d}"
            )));
        }
        Ok(Self {
            exponents,
            degree_bound: d,
            form: Form::Homogeneous,
        })
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    pub fn form(&self) -> Form {
        self.form
    }

    /// Number of affine variables.
    pub fn m(&self) -> usize {
        match self.form {
            Form::Affine => self.exponents.len(),
            Form::Homogeneous => self.exponents.len() - 1,
        }
    }

    /// `|j|` over the affine variables.
    pub fn affine_degree(&self) -> u32 {
        self.affine_exponents().iter().sum()
    }

    fn affine_exponents(&self) -> &[u32] {
        match self.form {
            Form::Affine => &self.exponents,
            Form::Homogeneous => &self.exponents[1..],
        }
    }

    /// `(d - |j|, j)`.
    pub fn to_homogeneous(&self) -> MultiIndex {
        match self.form {
            Form::Homogeneous => self.clone(),
            Form::Affine => {
                let mut e = Vec::with_capacity(self.exponents.len() + 1);
                e.push(self.degree_bound - self.affine_degree());
                e.extend_from_slice(&self.exponents);
                MultiIndex {
                    exponents: e,
                    degree_bound: self.degree_bound,
                    form: Form::Homogeneous,
                }
            }
        }
    }

    pub fn to_affine(&self) -> MultiIndex {
        MultiIndex {
            exponents: self.affine_exponents().to_vec(),
            degree_bound: self.degree_bound,
            form: Form::Affine,
        }
    }

    /// `d! / (j1! ... jm! (d - |j|)!)`, the coefficient variance.
    pub fn multinomial_weight(&self) -> f64 {
        let mut rest = self.degree_bound as u64;
        let mut w = 1.0;
        for &e in self.affine_exponents() {
            w *= binomial(rest, e as u64);
            rest -= e as u64;
        }
        w
    }
}

/// Affine multi-indices of `m` variables and degree `<= d` in graded
/// lexicographic order: total degree ascending, then lexicographically
/// descending, so `1, t1, t2, t1^2, t1 t2, t2^2, ...`.
pub fn graded_lex(m: usize, d: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut buf = vec![0u32; m];
    for deg in 0..=d {
        push_degree(&mut out, &mut buf, 0, deg, d);
    }
    out
}

fn push_degree(out: &mut Vec<MultiIndex>, buf: &mut [u32], pos: usize, left: u32, d: u32) {
    if pos + 1 == buf.len() {
        buf[pos] = left;
        out.push(MultiIndex {
            exponents: buf.to_vec(),
            degree_bound: d,
            form: Form::Affine,
        });
        return;
    }
    for e in (0..=left).rev() {
        buf[pos] = e;
        push_degree(out, buf, pos + 1, left - e, d);
    }
}

/// `binomial(d + m, m)`.
pub fn monomial_count(m: usize, d: u32) -> usize {
    binomial(d as u64 + m as u64, m as u64).round() as usize
}
