//! The limit variance `V_inf = lim d^{-m/2} Var(N_d^P)`.
//!
//! Letting `d -> infinity` in the scaled Kac-Rice integral gives
//!
//! `V_inf = 1 + (K / 2) int_0^inf t^{m-1} [ sigma_bar^2 G(rho_bar, D_bar) / (1 - e^{-t^2})^{m/2} - G(0, 0) ] dt`
//!
//! with `D_bar = e^{-t^2/2}` and `K = kappa_m kappa_{m-1} / (2 pi)^m`. Two
//! evaluations are offered:
//!
//! * [`VInfRoute::ChiProduct`] replaces `G` by the product of mixed chi
//!   moments, `G ~ E_m(rho_bar) prod_{k<m} E_k(D_bar)`. Exact for `m = 1`;
//!   for `m >= 2` the determinant does not factor this way and the value is
//!   a different constant.
//! * [`VInfRoute::GaussianMatrix`] estimates `G` itself by Monte Carlo on a
//!   `t`-grid (common random numbers, cubic spline).

use serde::{Deserialize, Serialize};

use super::limits::{m_kj, rho_bar, sigma_bar_sq};
use super::ncchi::{correlated_chi_product, product_mean_mc, MMethod};
use crate::error::{KssError, Result};
use crate::kacrice::{g_functional_many, rice_constant, z_grid};
use crate::numerics::{integrate, CubicSpline, QuadratureSpec};
use crate::rng::derive_seed;
use crate::stats::SampleMoments;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VInfRoute {
    ChiProduct,
    GaussianMatrix,
}

impl VInfRoute {
    pub fn name(self) -> &'static str {
        match self {
            VInfRoute::ChiProduct => "chi-product",
            VInfRoute::GaussianMatrix => "gaussian-matrix",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VInfSpec {
    pub quadrature: QuadratureSpec,
    /// `None`: chi product for `m = 1`, Gaussian matrices otherwise.
    pub route: Option<VInfRoute>,
    /// How the chi-product route evaluates `M_k`.
    pub m_method: MMethod,
    /// Nodes of the `t`-grid used by the Monte Carlo variants.
    pub grid_nodes: usize,
    /// Total Monte Carlo pairs, split over `batches` independent batches.
    pub mc_pairs: usize,
    pub batches: usize,
    pub seed: u64,
}

impl Default for VInfSpec {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default(),
            route: None,
            m_method: MMethod::Quadrature,
            grid_nodes: 120,
            mc_pairs: 1 << 20,
            batches: 16,
            seed: 0x7669_6e66_0000_0001,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VInfinity {
    pub m: usize,
    pub route: VInfRoute,
    pub value: f64,
    pub quadrature_error: f64,
    /// Standard error from the spread of batch estimates (0 without Monte Carlo).
    pub mc_error: f64,
    /// Integrand evaluations of the outer integral.
    pub nodes: usize,
    /// Truncation point of the `t`-integral.
    pub t_max: f64,
}

/// Everything the limit integrand needs at one `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitIngredients {
    pub t: f64,
    pub sigma_bar_sq: f64,
    pub rho_bar: f64,
    /// `m_{k,1}` for `k = 1..=m`.
    pub m_k1: Vec<f64>,
    /// `M_k(t)` for `k = 1..=m` (the last with the radial mixing constant).
    pub big_m: Vec<f64>,
    pub big_m_error: Vec<f64>,
}

impl LimitIngredients {
    pub fn at(t: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(KssError::InvalidDimension { got: 0, min: 1 });
        }
        let spec = QuadratureSpec::default().with_abs_tol(1e-13);
        let rb = rho_bar(t)?;
        let mut big_m = Vec::with_capacity(m);
        let mut big_m_error = Vec::with_capacity(m);
        for k in 1..=m {
            let r = if k == m { rb } else { (-0.5 * t * t).exp() };
            let s = (1.0 - r * r).sqrt();
            let (e, err) = correlated_chi_product(k, r, &spec)?;
            big_m.push(e / s);
            big_m_error.push(err / s);
        }
        Ok(Self {
            t,
            sigma_bar_sq: sigma_bar_sq(t)?,
            rho_bar: rb,
            m_k1: (1..=m).map(|k| m_kj(k, 1)).collect::<Result<_>>()?,
            big_m,
            big_m_error,
        })
    }
}

/// `t^{m-1} sigma_bar^2 / (1 - e^{-t^2})^{m/2}`; tends to `t / 2` at 0.
pub fn limit_weight(t: f64, m: usize) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let om = -(-t * t).exp_m1();
    Ok(sigma_bar_sq(t)? * t.powi(m as i32 - 1) / om.powf(0.5 * m as f64))
}

/// `(rho_bar, D_bar)` with the `t = 0` limit `(-1, 1)`.
fn limit_params(t: f64) -> Result<(f64, f64)> {
    if t == 0.0 {
        return Ok((-1.0, 1.0));
    }
    Ok((rho_bar(t)?.clamp(-1.0, 1.0), (-0.5 * t * t).exp()))
}

/// Heuristic size of the integrand at `t` (up to the constant `K / 2`),
/// used to place the truncation point. `|G(rho, D) - G(0, 0)|` is bounded by
/// `m! (rho^2 + (m - 1) D^2)` since `G` is even in both arguments with
/// `G <= m!`.
pub fn tail_bound(t: f64, m: usize) -> Result<f64> {
    let fact: f64 = (1..=m).map(|k| k as f64).product();
    let w = limit_weight(t, m)?;
    let (r, d) = limit_params(t)?;
    let tm = t.powi(m as i32 - 1);
    Ok((w - tm).abs() * fact + w * fact * (r * r + (m as f64 - 1.0) * d * d))
}

/// Smallest `T` on a quarter grid beyond 3 with `tail_bound < 1e-10` there
/// and at every later grid point up to `2T`.
pub fn truncation_point(m: usize) -> Result<f64> {
    let mut t = 3.0;
    loop {
        let ok = (0..=(4.0 * t) as usize).all(|i| tail_bound(t + 0.25 * i as f64, m).map(|b| b < 1e-10).unwrap_or(false));
        if ok {
            return Ok(t);
        }
        t += 0.25;
        if t > 40.0 {
            return Err(KssError::Series("no truncation point below t = 40".into()));
        }
    }
}

fn default_route(m: usize) -> VInfRoute {
    if m == 1 {
        VInfRoute::ChiProduct
    } else {
        VInfRoute::GaussianMatrix
    }
}

/// Outer integral for a given approximation of `G` along the grid.
fn outer(m: usize, t_max: f64, spec: &QuadratureSpec, g: impl Fn(f64) -> Result<f64>, g00: f64) -> Result<(f64, f64, usize)> {
    let mut failure = None;
    let mut count = 0usize;
    let f = |t: f64| {
        count += 1;
        let v = limit_weight(t, m).and_then(|w| Ok(w * g(t)?));
        match v {
            Ok(v) => v - t.powi(m as i32 - 1) * g00,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let (v, e) = integrate(f, 0.0, t_max, spec)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let half_k = 0.5 * rice_constant(m);
    Ok((1.0 + half_k * v, half_k * e, count))
}

/// Batch-means spline integration: `values[b][j]` is the batch-`b`
/// estimate at grid node `j`, the last entry being `G(0, 0)`.
fn batched(
    m: usize,
    t_max: f64,
    grid: &[f64],
    batches: &[Vec<f64>],
    spec: &QuadratureSpec,
) -> Result<(f64, f64, f64, usize)> {
    let n = grid.len();
    let nb = batches.len() as f64;
    let pooled: Vec<f64> = (0..=n).map(|j| batches.iter().map(|b| b[j]).sum::<f64>() / nb).collect();
    let eval = |vals: &[f64]| -> Result<(f64, f64, usize)> {
        let spline = CubicSpline::new(grid.to_vec(), vals[..n].to_vec())?;
        outer(m, t_max, spec, |t| Ok(spline.eval(t)), vals[n])
    };
    let (value, qerr, nodes) = eval(&pooled)?;
    let per_batch: Vec<f64> = batches.iter().map(|b| eval(b).map(|r| r.0)).collect::<Result<_>>()?;
    let spread = SampleMoments::from_samples(&per_batch);
    Ok((value, qerr, spread.se_mean, nodes))
}

/// `V_inf(m)` with its quadrature and Monte Carlo error estimates.
pub fn v_infinity(m: usize, spec: &VInfSpec) -> Result<VInfinity> {
    if m == 0 {
        return Err(KssError::InvalidDimension { got: 0, min: 1 });
    }
    let route = spec.route.unwrap_or_else(|| default_route(m));
    let t_max = truncation_point(m)?;
    let g00: f64 = (1..=m).map(|k| m_kj(k, 1).map(|v| v * v)).product::<Result<f64>>()?;
    let nb = spec.batches.max(2);
    let per_batch = (spec.mc_pairs / nb).max(2);
    let grid = z_grid(t_max, spec.grid_nodes);

    let (value, quadrature_error, mc_error, nodes) = match (route, spec.m_method) {
        (VInfRoute::ChiProduct, MMethod::Quadrature) => {
            let inner = QuadratureSpec::default().with_abs_tol(1e-13);
            let inner_err = std::cell::Cell::new(0.0f64);
            let g = |t: f64| -> Result<f64> {
                let (r, d) = limit_params(t)?;
                let mut p = 1.0;
                for k in 1..=m {
                    let (e, err) = correlated_chi_product(k, if k == m { r } else { d }, &inner)?;
                    inner_err.set(inner_err.get().max(err / e.abs().max(1e-300)));
                    p *= e;
                }
                Ok(p)
            };
            let (v, e, n) = outer(m, t_max, &spec.quadrature, g, g00)?;
            // Relative inner error times the integral of the weight (at most t_max).
            let propagated = 0.5 * rice_constant(m) * m as f64 * inner_err.get() * g00.max(1.0) * t_max.powi(m as i32);
            (v, e + propagated, 0.0, n)
        }
        (VInfRoute::ChiProduct, MMethod::MonteCarlo) => {
            let params: Vec<(f64, f64)> = grid.iter().map(|&t| limit_params(t)).collect::<Result<_>>()?;
            let mut batches = vec![vec![1.0; grid.len() + 1]; nb];
            for (b, out) in batches.iter_mut().enumerate() {
                let seed = derive_seed(spec.seed, b as u64);
                for k in 1..=m {
                    let mut coefs: Vec<(f64, f64)> = params
                        .iter()
                        .map(|&(r, d)| {
                            let c = if k == m { r } else { d };
                            (c, (1.0 - c * c).max(0.0).sqrt())
                        })
                        .collect();
                    coefs.push((0.0, 1.0));
                    let est = product_mean_mc(k, &coefs, per_batch, derive_seed(seed, k as u64))?;
                    for (o, e) in out.iter_mut().zip(est) {
                        *o *= e.0;
                    }
                }
            }
            batched(m, t_max, &grid, &batches, &spec.quadrature)?
        }
        (VInfRoute::GaussianMatrix, _) => {
            let mut params: Vec<(f64, f64)> = grid.iter().map(|&t| limit_params(t)).collect::<Result<_>>()?;
            params.push((0.0, 0.0));
            let batches: Vec<Vec<f64>> = (0..nb)
                .map(|b| {
                    let est = g_functional_many(&params, m, per_batch, derive_seed(spec.seed, b as u64))?;
                    Ok(est.into_iter().map(|e| e.value).collect())
                })
                .collect::<Result<_>>()?;
            batched(m, t_max, &grid, &batches, &spec.quadrature)?
        }
    };
    Ok(VInfinity {
        m,
        route,
        value,
        quadrature_error,
        mc_error,
        nodes,
        t_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_vanishes_at_zero() {
        for m in 1..4 {
            let w = limit_weight(1e-3, m).unwrap();
            assert!((w - 5e-4).abs() < 1e-6, "m={m} {w}");
        }
    }

    #[test]
    fn truncation_is_modest() {
        for m in 1..4 {
            let t = truncation_point(m).unwrap();
            assert!((5.0..10.0).contains(&t), "m={m} T={t}");
        }
    }

    #[test]
    fn ingredients_at_large_t() {
        let li = LimitIngredients::at(8.0, 3).unwrap();
        for k in 0..3 {
            assert!((li.big_m[k] - li.m_k1[k].powi(2)).abs() < 1e-8);
        }
    }
}
