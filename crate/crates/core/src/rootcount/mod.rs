//! Certified counts of real roots of KSS systems and Monte Carlo moments of
//! the count.

mod inclusion;
mod sturm;
mod subdivision;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KssError, Result};
use crate::kss::{Form, System};
use crate::rng::derive_seed;
use crate::stats::SampleMoments;

pub use inclusion::{aberth, approximate_real_count, certified_real_count};
pub use sturm::{count_distinct_real_roots, dyadic_integers, SturmCount};
pub use subdivision::{count_homogeneous, SubdivisionOptions, SubdivisionOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    Sturm,
    Inclusion,
    Subdivision,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCountResult {
    pub count: u64,
    pub certified: bool,
    pub unresolved_regions: u64,
    /// `d^m`.
    pub bezout_cap: u64,
    pub method: CountMethod,
    /// Verified zeros of the homogenized system on the hyperplane at infinity.
    pub at_infinity: u64,
}

/// How [`count_univariate_with`] chooses its algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnivariateMethod {
    /// Sturm up to `sturm_max_degree`, inclusion discs above (with Sturm as
    /// the fallback when the discs overlap).
    Auto,
    Sturm,
    Inclusion,
}

#[derive(Clone, Debug)]
pub struct UnivariateOptions {
    pub method: UnivariateMethod,
    pub sturm_max_degree: usize,
    /// Largest coefficient size, in bits, tolerated inside the Sturm chain.
    pub bit_budget: u64,
}

impl Default for UnivariateOptions {
    fn default() -> Self {
        Self {
            method: UnivariateMethod::Auto,
            sturm_max_degree: 24,
            bit_budget: 1 << 22,
        }
    }
}

pub fn count_univariate(coeffs: &[f64]) -> Result<RootCountResult> {
    count_univariate_with(coeffs, &UnivariateOptions::default())
}

fn sturm_result(coeffs: &[f64], opts: &UnivariateOptions) -> RootCountResult {
    let n = coeffs.len() as u64 - 1;
    match count_distinct_real_roots(&dyadic_integers(coeffs), opts.bit_budget) {
        SturmCount::Exact(c) => RootCountResult {
            count: c as u64,
            certified: true,
            unresolved_regions: 0,
            bezout_cap: n,
            method: CountMethod::Sturm,
            at_infinity: 0,
        },
        SturmCount::BudgetExceeded => RootCountResult {
            count: approximate_real_count(coeffs) as u64,
            certified: false,
            unresolved_regions: 1,
            bezout_cap: n,
            method: CountMethod::Sturm,
            at_infinity: 0,
        },
    }
}

/// Number of distinct real roots of `sum_k coeffs[k] t^k`.
pub fn count_univariate_with(coeffs: &[f64], opts: &UnivariateOptions) -> Result<RootCountResult> {
    if coeffs.iter().all(|&c| c == 0.0) {
        return Err(KssError::ZeroPolynomial);
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(KssError::InvalidArgument("non-finite coefficient".into()));
    }
    if *coeffs.last().unwrap() == 0.0 {
        return Err(KssError::DegenerateLeading);
    }
    let n = coeffs.len() - 1;
    let use_inclusion = match opts.method {
        UnivariateMethod::Sturm => false,
        UnivariateMethod::Inclusion => true,
        UnivariateMethod::Auto => n > opts.sturm_max_degree,
    };
    if use_inclusion {
        if let Some(c) = certified_real_count(coeffs) {
            return Ok(RootCountResult {
                count: c as u64,
                certified: true,
                unresolved_regions: 0,
                bezout_cap: n as u64,
                method: CountMethod::Inclusion,
                at_infinity: 0,
            });
        }
        log::debug!("inclusion discs overlap at degree {n}; falling back to Sturm");
    }
    Ok(sturm_result(coeffs, opts))
}

/// Real solutions in `R^m` of a square system with `m >= 2`, counted as
/// verified zeros of the homogenized system (one per antipodal pair) off
/// the hyperplane at infinity.
pub fn count_system(system: &System<f64>) -> Result<RootCountResult> {
    count_system_with(system, &SubdivisionOptions::default())
}

pub fn count_system_with(system: &System<f64>, opts: &SubdivisionOptions) -> Result<RootCountResult> {
    let m = system.m();
    if m < 2 {
        return Err(KssError::InvalidDimension { got: m, min: 2 });
    }
    let y = match system.form() {
        Form::Affine => system.homogenize(),
        Form::Homogeneous => system.clone(),
    };
    let out = count_homogeneous(&y, opts);
    let bezout_cap = (system.d() as u64).pow(m as u32);
    Ok(RootCountResult {
        count: (out.zeros.len() - out.equator_hits) as u64,
        certified: out.unresolved == 0,
        unresolved_regions: out.unresolved as u64,
        bezout_cap,
        method: CountMethod::Subdivision,
        at_infinity: out.equator_hits as u64,
    })
}

/// Dispatches on the number of variables.
pub fn count(system: &System<f64>) -> Result<RootCountResult> {
    if system.m() == 1 {
        let r = count_univariate(system.equation(0))?;
        Ok(RootCountResult {
            bezout_cap: system.d() as u64,
            ..r
        })
    } else {
        count_system(system)
    }
}

/// One Monte Carlo replicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    pub index: u64,
    /// Seed of the system actually counted (after any redraws).
    pub seed: u64,
    pub m: usize,
    pub d: u32,
    pub result: RootCountResult,
    pub redraws: u32,
    pub wall_time_ms: f64,
}

const MAX_REDRAWS: u32 = 16;

/// Samples and counts replicate `index` of the experiment keyed by `master`.
///
/// Degenerate draws (vanishing leading coefficient, zeros at infinity) are
/// probability-zero events; they are redrawn with a derived seed and logged.
pub fn run_replicate(m: usize, d: u32, master: u64, index: u64) -> Result<Replicate> {
    let start = Instant::now();
    let base = derive_seed(master, index);
    let mut redraws = 0u32;
    loop {
        let seed = if redraws == 0 { base } else { derive_seed(base, redraws as u64) };
        let system = System::<f64>::sample(m, d, seed)?;
        match count(&system) {
            Ok(r) if r.at_infinity == 0 => {
                return Ok(Replicate {
                    index,
                    seed,
                    m,
                    d,
                    result: r,
                    redraws,
                    wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
                });
            }
            Ok(_) | Err(KssError::DegenerateLeading) => {
                log::warn!("replicate {index}: degenerate draw with seed {seed}, redrawing");
                redraws += 1;
                if redraws > MAX_REDRAWS {
                    return Err(KssError::InvalidSystem(format!(
                        "replicate {index}: {MAX_REDRAWS} degenerate draws in a row"
                    )));
                }
            }
            Err(e) => return Err(e),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub m: usize,
    pub d: u32,
    pub n: usize,
    pub seed: u64,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub se_variance_jackknife: f64,
    pub uncertified_fraction: f64,
    pub redraws: u64,
    pub wall_time_s: f64,
}

impl MomentEstimate {
    /// Aggregates replicates (sorted by index first, so the result does not
    /// depend on completion order).
    pub fn from_replicates(m: usize, d: u32, seed: u64, reps: &mut [Replicate], wall_time_s: f64) -> Self {
        reps.sort_by_key(|r| r.index);
        let xs: Vec<f64> = reps.iter().map(|r| r.result.count as f64).collect();
        let s = SampleMoments::from_samples(&xs);
        let unc = reps.iter().filter(|r| !r.result.certified).count();
        Self {
            m,
            d,
            n: s.n,
            seed,
            mean: s.mean,
            variance: s.variance,
            se_mean: s.se_mean,
            se_variance: s.se_variance,
            se_variance_jackknife: s.se_variance_jackknife,
            uncertified_fraction: unc as f64 / s.n as f64,
            redraws: reps.iter().map(|r| r.redraws as u64).sum(),
            wall_time_s,
        }
    }

    /// `mean / d^{m/2}` with its standard error.
    pub fn scaled_mean(&self) -> (f64, f64) {
        let s = (self.d as f64).powf(self.m as f64 / 2.0);
        (self.mean / s, self.se_mean / s)
    }

    /// `variance / d^{m/2}` with its standard error.
    pub fn scaled_variance(&self) -> (f64, f64) {
        let s = (self.d as f64).powf(self.m as f64 / 2.0);
        (self.variance / s, self.se_variance / s)
    }
}

/// Monte Carlo moments of the number of real roots.
pub fn estimate_moments(m: usize, d: u32, n_samples: usize, seed: u64) -> Result<MomentEstimate> {
    if n_samples < 2 {
        return Err(KssError::InvalidArgument("need at least two samples".into()));
    }
    let start = Instant::now();
    let mut reps = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| run_replicate(m, d, seed, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentEstimate::from_replicates(
        m,
        d,
        seed,
        &mut reps,
        start.elapsed().as_secs_f64(),
    ))
}
