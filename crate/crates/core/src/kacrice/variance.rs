//! The finite-degree variance of the number of real roots as a
//! one-dimensional Kac-Rice integral in the scaled angle `z`.
//!
//! With `K = kappa_m kappa_{m-1} / (2 pi)^m`, `w(z)` the
//! [`Kernel::rice_weight`] and `s(z) = (sqrt(d) sin(z / sqrt d))^{m-1}`:
//!
//! * Rice part of `d^{-m/2} E N(N - 1)` on the sphere: `2K int_0^{Z} w G(rho, D) dz`,
//! * `d^{-m/2} (E N)^2`: `2K int_0^{Z} s G(0, 0) dz`,
//!
//! where `Z = sqrt(d) pi / 2` and the factor 2 folds the mirror half
//! `[Z, 2Z]` onto `[0, Z]`. The Rice integral only sees pairs `(s, t)` with
//! `t != -s`; the antipodal pairs add exactly `E N = 2 d^{m/2}` to
//! `E N(N - 1)`. Hence for the affine count `N^P = N / 2`
//!
//! `d^{-m/2} Var(N^P) = 1 + (K / 2) int_0^Z (w G(rho, D) - s G(0, 0)) dz`.

use serde::{Deserialize, Serialize};

use super::gfun::{g_exact_m1, g_functional_many};
use super::kernel::{series_cutoff, Kernel};
use crate::error::{KssError, Result};
use crate::numerics::special::sphere_measure;
use crate::numerics::{integrate_vec, CubicSpline, QuadratureSpec};

/// How `G(rho, D)` is evaluated inside the integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GMethod {
    /// Closed form, available for `m = 1` only.
    Exact,
    /// Common-random-number Monte Carlo on a `z`-grid, then a cubic spline.
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KacRiceSpec {
    pub quadrature: QuadratureSpec,
    /// `None` picks [`GMethod::Exact`] for `m = 1`, Monte Carlo otherwise.
    pub g_method: Option<GMethod>,
    /// Nodes of the `z`-grid for Monte Carlo `G` (one at `z = 0`, the rest
    /// geometrically spaced).
    pub grid_nodes: usize,
    /// Antithetic pairs per grid node.
    pub g_pairs: usize,
    /// Series cutoff as a multiple of `min(1, sqrt d)`.
    pub series_cutoff_factor: f64,
    pub seed: u64,
}

impl Default for KacRiceSpec {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default(),
            g_method: None,
            grid_nodes: 200,
            g_pairs: 2_000_000,
            series_cutoff_factor: 0.05,
            seed: 0x6b61_6372_6963_6501,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteDVariance {
    pub d: u64,
    pub m: usize,
    /// `d^{-m/2} Var(N^P)`.
    pub value: f64,
    /// Quadrature error estimate on `value`.
    pub quadrature_error: f64,
    /// Largest standard error of the Monte Carlo `G` over the grid
    /// (zero for the closed form).
    pub g_se_max: f64,
    /// `d^{-m/2} E N(N - 1)` for the sphere count `N = 2 N^P`.
    pub second_factorial_moment: f64,
    /// The Rice double integral alone (pairs that are not antipodal).
    pub rice_integral: f64,
    /// `d^{-m/2} (E N)^2` computed on the same nodes.
    pub mean_square: f64,
    pub evaluations: usize,
}

/// Geometric grid on `[0, zmax]` with a node at 0.
pub fn z_grid(zmax: f64, nodes: usize) -> Vec<f64> {
    let n = nodes.max(4);
    let zmin = 1e-3f64.min(zmax / 10.0);
    let ratio = (zmax / zmin).powf(1.0 / (n - 2) as f64);
    let mut g = Vec::with_capacity(n);
    g.push(0.0);
    let mut z = zmin;
    for _ in 1..n {
        g.push(z);
        z *= ratio;
    }
    *g.last_mut().unwrap() = zmax;
    g
}

enum GSource {
    Exact,
    Spline { spline: CubicSpline, g00: f64, se_max: f64 },
}

impl GSource {
    fn eval(&self, k: &Kernel<f64>) -> f64 {
        match self {
            GSource::Exact => g_exact_m1(k.rho),
            GSource::Spline { spline, .. } => spline.eval(k.z),
        }
    }

    fn g00(&self) -> f64 {
        match self {
            GSource::Exact => std::f64::consts::FRAC_2_PI,
            GSource::Spline { g00, .. } => *g00,
        }
    }

    fn se_max(&self) -> f64 {
        match self {
            GSource::Exact => 0.0,
            GSource::Spline { se_max, .. } => *se_max,
        }
    }
}

fn g_source(d: u64, m: usize, spec: &KacRiceSpec, zmax: f64, z0: f64) -> Result<GSource> {
    let method = spec
        .g_method
        .unwrap_or(if m == 1 { GMethod::Exact } else { GMethod::MonteCarlo });
    match method {
        GMethod::Exact if m == 1 => Ok(GSource::Exact),
        GMethod::Exact => Err(KssError::InvalidArgument(format!(
            "no closed form for G when m = {m}; use Monte Carlo"
        ))),
        GMethod::MonteCarlo => {
            let grid = z_grid(zmax, spec.grid_nodes);
            let mut params: Vec<(f64, f64)> = grid
                .iter()
                .map(|&z| {
                    let k = Kernel::with_cutoff(z, d, z0)?;
                    Ok((k.rho.clamp(-1.0, 1.0), k.dd.clamp(-1.0, 1.0)))
                })
                .collect::<Result<_>>()?;
            params.push((0.0, 0.0));
            let est = g_functional_many(&params, m, spec.g_pairs, spec.seed)?;
            let (g00, nodes) = est.split_last().unwrap();
            let se_max = est.iter().map(|e| e.se).fold(0.0, f64::max);
            let spline = CubicSpline::new(grid, nodes.iter().map(|e| e.value).collect())?;
            Ok(GSource::Spline {
                spline,
                g00: g00.value,
                se_max,
            })
        }
    }
}

/// `kappa_m kappa_{m-1} / (2 pi)^m`.
pub fn rice_constant(m: usize) -> f64 {
    sphere_measure(m) * sphere_measure(m - 1) / (2.0 * std::f64::consts::PI).powi(m as i32)
}

/// Evaluates the variance integral and its by-products on shared nodes.
pub fn kac_rice_integrals(d: u64, m: usize, spec: &KacRiceSpec) -> Result<FiniteDVariance> {
    if d < 2 {
        return Err(KssError::InvalidDegree(d));
    }
    if m == 0 {
        return Err(KssError::InvalidDimension { got: 0, min: 1 });
    }
    let sd = (d as f64).sqrt();
    let zmax = sd * std::f64::consts::FRAC_PI_2;
    let z0 = spec.series_cutoff_factor / 0.05 * series_cutoff(d);
    let g = g_source(d, m, spec, zmax, z0)?;
    let g00 = g.g00();
    let mut failure = None;
    let mut integrand = |z: f64| -> [f64; 3] {
        match Kernel::with_cutoff(z, d, z0) {
            Ok(k) => {
                let f1 = k.rice_weight(m) * g.eval(&k);
                let f2 = (sd * (z / sd).sin()).powi(m as i32 - 1) * g00;
                [f1, f2, f1 - f2]
            }
            Err(e) => {
                failure.get_or_insert(e);
                [0.0; 3]
            }
        }
    };
    let split = z0.min(zmax);
    let lo = integrate_vec(&mut integrand, 0.0, split, &spec.quadrature)?;
    let hi = integrate_vec(&mut integrand, split, zmax, &spec.quadrature)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let k = rice_constant(m);
    let i = |c: usize| lo.value[c] + hi.value[c];
    let rice_integral = 2.0 * k * i(0);
    let mean_square = 2.0 * k * i(1);
    Ok(FiniteDVariance {
        d,
        m,
        value: 1.0 + 0.5 * k * i(2),
        quadrature_error: 0.5 * k * (lo.error + hi.error),
        g_se_max: g.se_max(),
        second_factorial_moment: rice_integral + 2.0,
        rice_integral,
        mean_square,
        evaluations: lo.evaluations + hi.evaluations,
    })
}

/// `d^{-m/2} Var(N_d^P)`.
pub fn variance_finite_d(d: u64, m: usize, spec: &KacRiceSpec) -> Result<FiniteDVariance> {
    kac_rice_integrals(d, m, spec)
}

/// `d^{-m/2} E N(N - 1)` for the sphere count, including antipodal pairs.
pub fn second_factorial_moment(d: u64, m: usize, spec: &KacRiceSpec) -> Result<f64> {
    Ok(kac_rice_integrals(d, m, spec)?.second_factorial_moment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rice_constant_values() {
        // kappa_1 kappa_0 / (2 pi) = 2, kappa_2 kappa_1 / (2 pi)^2 = 2
        assert!((rice_constant(1) - 2.0).abs() < 1e-14);
        assert!((rice_constant(2) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn mean_square_term_is_exact() {
        for d in [3u64, 10, 400] {
            let r = variance_finite_d(d, 1, &KacRiceSpec::default()).unwrap();
            let want = 4.0 * (d as f64).sqrt();
            assert!((r.mean_square - want).abs() < 1e-9 * want, "{} {}", r.mean_square, want);
            let lhs = 0.25 * (r.second_factorial_moment - r.mean_square) + 0.5;
            assert!((lhs - r.value).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn grid_shape() {
        let g = z_grid(10.0, 50);
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 10.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
