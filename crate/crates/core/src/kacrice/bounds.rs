//! Gaussian decay of the scaled kernel and the mirror symmetry of the
//! conditional expectation.

use serde::{Deserialize, Serialize};

use super::gfun::g_exact_m1;
use super::kernel::Kernel;
use crate::error::Result;

/// Outcome of the decay inequalities at one `(z, d)` with rate `alpha`.
///
/// The boolean fields are the constant-free inequalities; the two ratios
/// are the smallest constants that make the remaining ones hold at this
/// point, to be bounded uniformly over a grid by the caller.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    pub z: f64,
    pub d: u64,
    /// `0 <= C <= D`.
    pub c_le_d: bool,
    /// `D <= cos^{d-2}(z / sqrt d) <= exp(-alpha z^2)`.
    pub d_le_gauss: bool,
    /// `|A| <= z exp(-alpha z^2)`.
    pub a_bound: bool,
    /// `|B| <= (1 + z^2) exp(-alpha z^2)`.
    pub b_bound: bool,
    /// `0 <= 1 - sigma^2` (up to rounding).
    pub sigma_le_one: bool,
    /// `(1 - sigma^2) exp(2 alpha z^2)`.
    pub sigma_constant: f64,
    /// `|rho| exp(2 alpha z^2) / (1 + z^2)^2`.
    pub rho_constant: f64,
    /// `1 - C^2 - A^2`, to be bounded below away from the origin.
    pub gap: f64,
}

impl DecayCheck {
    pub fn inequalities_hold(&self) -> bool {
        self.c_le_d && self.d_le_gauss && self.a_bound && self.b_bound && self.sigma_le_one
    }
}

/// Evaluates the decay bounds at `(z, d)`; meaningful for `z / sqrt(d) <= pi / 2`.
pub fn decay_check(z: f64, d: u64, alpha: f64) -> Result<DecayCheck> {
    let k = Kernel::<f64>::new(z, d)?;
    let g = (-alpha * z * z).exp();
    let slack = 1e-14;
    Ok(DecayCheck {
        z,
        d,
        c_le_d: k.c >= -slack && k.c <= k.dd + slack,
        d_le_gauss: {
            let x = z / (d as f64).sqrt();
            let cos_dm2 = x.cos().powi(d as i32 - 2);
            k.dd <= cos_dm2 + slack && cos_dm2 <= g + slack
        },
        a_bound: k.a.abs() <= z * g + slack,
        b_bound: k.b.abs() <= (1.0 + z * z) * g + slack,
        sigma_le_one: 1.0 - k.sigma_sq >= -1e-12,
        // Log form: exp(-2 alpha z^2) underflows long before z / sqrt(d) = pi / 2,
        // and 1 - sigma^2 = A^2 / (1 - C^2) avoids rounding noise near 1.
        sigma_constant: ((k.a * k.a / k.one_minus_c2).ln() + 2.0 * alpha * z * z).exp(),
        rho_constant: (k.rho.abs().ln() + 2.0 * alpha * z * z).exp() / (1.0 + z * z).powi(2),
        gap: k.one_minus_c2 - k.a * k.a,
    })
}

/// `|E(pi - psi) - E(psi)|` at `psi = z / sqrt(d)` for `m = 1`, where
/// `E = sigma^2 G(rho)` is the conditional expectation of the product of
/// derivative magnitudes. The far point is evaluated by the closed form
/// directly, not through the reflection used by [`Kernel::new`].
pub fn symmetrization_gap(z: f64, d: u64) -> Result<f64> {
    let near = Kernel::<f64>::new(z, d)?;
    let far = Kernel::<f64>::direct((d as f64).sqrt() * std::f64::consts::PI - z, d);
    let e = |k: &Kernel<f64>| k.sigma_sq * g_exact_m1(k.rho);
    Ok((e(&near) - e(&far)).abs())
}
