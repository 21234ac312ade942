//! Monte Carlo against Kac-Rice, degree by degree, closed by the limit and
//! its second-chaos lower bound.

use std::fmt::Write as _;

use kss_core::asymptotics::v_infinity;
use kss_core::hermite::i2d_lower_bound;
use kss_core::kacrice::variance_finite_d;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{EngineError, Result};
use crate::experiment::{moments_in_memory, with_workers, MomentSummary};

/// Gaps beyond this many combined errors are flagged.
pub const FLAG_SIGMAS: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub d: u32,
    pub mc: MomentSummary,
    /// `d^{-m/2} Var` from the Kac-Rice integral.
    pub kac_rice: f64,
    pub kac_rice_error: f64,
    /// Largest Monte Carlo standard error of `G` on the grid (0 for `m = 1`).
    pub kac_rice_g_se: f64,
    /// `|MC - Kac-Rice| / combined error`.
    pub gap_sigmas: f64,
    /// `|scaled mean - 1| / SE`.
    pub mean_sigmas: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub v_infinity: f64,
    pub v_infinity_error: f64,
    pub route: String,
    pub i2d_degree: u64,
    pub i2d_bound: f64,
    pub i2d_se: f64,
    /// The bound exceeds the limit by more than the combined error.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub schema_version: u32,
    pub m: usize,
    pub n_samples: usize,
    pub rows: Vec<ComparisonRow>,
    pub limit: LimitRow,
}

impl ComparisonTable {
    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.flagged).count() + self.limit.flagged as usize
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>8} {:>12} {:>10} {:>12} {:>10} {:>8} {:>10} {:>5}",
            "d", "mc_var", "se", "kac_rice", "err", "gap/se", "mean", "flag"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>8} {:>12.6} {:>10.6} {:>12.6} {:>10.2e} {:>8.2} {:>10.4} {:>5}",
                r.d,
                r.mc.scaled_variance,
                r.mc.scaled_variance_se,
                r.kac_rice,
                r.kac_rice_error,
                r.gap_sigmas,
                r.mc.scaled_mean,
                if r.flagged { "!" } else { "" }
            );
        }
        let l = &self.limit;
        let _ = writeln!(
            s,
            "{:>8} {:>12.6} {:>10.6}   i2d(d={}) = {:.6} +- {:.6} {}",
            "inf",
            l.v_infinity,
            l.v_infinity_error,
            l.i2d_degree,
            l.i2d_bound,
            l.i2d_se,
            if l.flagged { "!" } else { "" }
        );
        s
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "d",
            "mc_scaled_variance",
            "mc_scaled_variance_se",
            "mc_scaled_mean",
            "mc_scaled_mean_se",
            "kac_rice",
            "kac_rice_error",
            "gap_sigmas",
            "flagged",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.d.to_string(),
                r.mc.scaled_variance.to_string(),
                r.mc.scaled_variance_se.to_string(),
                r.mc.scaled_mean.to_string(),
                r.mc.scaled_mean_se.to_string(),
                r.kac_rice.to_string(),
                r.kac_rice_error.to_string(),
                r.gap_sigmas.to_string(),
                r.flagged.to_string(),
            ])?;
        }
        let l = &self.limit;
        w.write_record([
            "inf".to_string(),
            l.v_infinity.to_string(),
            l.v_infinity_error.to_string(),
            String::new(),
            String::new(),
            l.i2d_bound.to_string(),
            l.i2d_se.to_string(),
            String::new(),
            l.flagged.to_string(),
        ])?;
        let bytes = w.into_inner().map_err(|e| EngineError::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn sigmas(gap: f64, err: f64) -> f64 {
    if err > 0.0 {
        gap / err
    } else if gap == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// One row per degree of `d_list`, plus the limit row. Budgets, seeds and
/// tolerances come from `config`.
pub fn compare_routes(m: usize, d_list: &[u32], config: &ExperimentConfig) -> Result<ComparisonTable> {
    let mut c = config.clone();
    c.m = m;
    c.d = d_list.to_vec();
    c.validate()?;
    let kr_spec = c.kac_rice_spec();
    let mut rows = Vec::with_capacity(d_list.len());
    for &d in d_list {
        let mc = moments_in_memory(m, d, c.n_samples, c.master_seed, c.workers)?;
        let kr = with_workers(c.workers, || variance_finite_d(d as u64, m, &kr_spec))??;
        let err = mc.scaled_variance_se.hypot(kr.quadrature_error);
        let gap_sigmas = sigmas((mc.scaled_variance - kr.value).abs(), err);
        let mean_sigmas = sigmas((mc.scaled_mean - 1.0).abs(), mc.scaled_mean_se);
        rows.push(ComparisonRow {
            d,
            kac_rice: kr.value,
            kac_rice_error: kr.quadrature_error,
            kac_rice_g_se: kr.g_se_max,
            gap_sigmas,
            mean_sigmas,
            flagged: gap_sigmas > FLAG_SIGMAS || mean_sigmas > FLAG_SIGMAS || mc.uncertified > 0,
            mc,
        });
    }
    let vspec = c.vinf_spec();
    let ispec = c.i2_spec();
    let (v, b) = with_workers(c.workers, || {
        (v_infinity(m, &vspec), i2d_lower_bound(c.i2d_degree, m, &ispec))
    })?;
    let (v, b) = (v?, b?);
    let v_err = v.quadrature_error.hypot(v.mc_error);
    let limit = LimitRow {
        v_infinity: v.value,
        v_infinity_error: v_err,
        route: v.route.name().to_string(),
        i2d_degree: c.i2d_degree,
        i2d_bound: b.value,
        i2d_se: b.se,
        flagged: b.value - v.value > FLAG_SIGMAS * v_err.hypot(b.se),
    };
    Ok(ComparisonTable {
        schema_version: crate::experiment::SCHEMA_VERSION,
        m,
        n_samples: c.n_samples,
        rows,
        limit,
    })
}
