//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # comment
//! m = 1
//! d = 10, 50, 200
//! n_samples = 10000
//! ```
//!
//! Sources are layered: defaults, then the file, then `KSS_*` environment
//! variables (`KSS_N_SAMPLES=500` sets `n_samples`), then command-line flags.
//! Unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use kss_core::asymptotics::VInfSpec;
use kss_core::hermite::I2Spec;
use kss_core::kacrice::KacRiceSpec;
use kss_core::numerics::QuadratureSpec;
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

pub const ENV_PREFIX: &str = "KSS_";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub m: usize,
    /// Degree sweep, strictly increasing.
    pub d: Vec<u32>,
    pub n_samples: usize,
    pub master_seed: u64,
    /// Worker threads; 0 lets the pool decide. Never affects results.
    pub workers: usize,
    pub quad_abs_tol: f64,
    pub quad_rel_tol: f64,
    /// Antithetic pairs per grid node for Monte Carlo `G` (`m >= 2`).
    pub g_pairs: usize,
    /// Total pairs for the Monte Carlo limit-variance route.
    pub vinf_pairs: usize,
    /// Gaussian matrices for the Hermite coefficients.
    pub hermite_samples: usize,
    /// Degree at which the second-chaos bound is evaluated.
    pub i2d_degree: u64,
    pub out_dir: PathBuf,
    pub strict: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 1,
            d: vec![10],
            n_samples: 1000,
            master_seed: 1,
            workers: 0,
            quad_abs_tol: 1e-8,
            quad_rel_tol: 1e-10,
            g_pairs: 200_000,
            vinf_pairs: 1 << 18,
            hermite_samples: 1_000_000,
            i2d_degree: 10_000,
            out_dir: PathBuf::from("kss-out"),
            strict: false,
        }
    }
}

const KEYS: [&str; 13] = [
    "m",
    "d",
    "n_samples",
    "master_seed",
    "workers",
    "quad_abs_tol",
    "quad_rel_tol",
    "g_pairs",
    "vinf_pairs",
    "hermite_samples",
    "i2d_degree",
    "out_dir",
    "strict",
];

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("{key}: cannot parse {v:?}: {e}"))
}

fn parse_bool(key: &str, v: &str) -> std::result::Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(format!("{key}: expected a boolean, got {v:?}")),
    }
}

/// Comma-separated list; `a..b` and `a..b..step` ranges are accepted too.
fn parse_degrees(v: &str) -> std::result::Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bits: Vec<&str> = part.split("..").collect();
        match bits.as_slice() {
            [one] => out.push(parse_num("d", one)?),
            [a, b] | [a, b, _] => {
                let a: u32 = parse_num("d", a)?;
                let b: u32 = parse_num("d", b)?;
                let step: u32 = if bits.len() == 3 { parse_num("d", bits[2])? } else { 1 };
                if step == 0 {
                    return Err("d: zero range step".into());
                }
                out.extend((a..=b).step_by(step as usize));
            }
            _ => return Err(format!("d: bad range {part:?}")),
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        match key {
            "m" => self.m = parse_num(key, v)?,
            "d" => self.d = parse_degrees(v)?,
            "n_samples" => self.n_samples = parse_num(key, v)?,
            "master_seed" => self.master_seed = parse_num(key, v)?,
            "workers" => self.workers = parse_num(key, v)?,
            "quad_abs_tol" => self.quad_abs_tol = parse_num(key, v)?,
            "quad_rel_tol" => self.quad_rel_tol = parse_num(key, v)?,
            "g_pairs" => self.g_pairs = parse_num(key, v)?,
            "vinf_pairs" => self.vinf_pairs = parse_num(key, v)?,
            "hermite_samples" => self.hermite_samples = parse_num(key, v)?,
            "i2d_degree" => self.i2d_degree = parse_num(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "strict" => self.strict = parse_bool(key, v)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn merge_str(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| EngineError::Parse {
                line: i + 1,
                message: format!("expected key = value, got {line:?}"),
            })?;
            self.set(k.trim(), v)
                .map_err(|message| EngineError::Parse { line: i + 1, message })?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.merge_str(text)?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| EngineError::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies `KSS_<KEY>` variables from `vars` (normally `std::env::vars()`).
    pub fn merge_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        let env: BTreeMap<String, String> = vars
            .into_iter()
            .filter(|(k, _)| k.starts_with(ENV_PREFIX))
            .collect();
        for key in KEYS {
            let name = format!("{ENV_PREFIX}{}", key.to_ascii_uppercase());
            if let Some(v) = env.get(&name) {
                self.set(key, v).map_err(|e| EngineError::Config(format!("{name}: {e}")))?;
            }
        }
        Ok(())
    }

    /// The file format; parsing it back gives an equal config.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let d: Vec<String> = self.d.iter().map(u32::to_string).collect();
        // `{:?}` on f64 is the shortest representation that round-trips.
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "d = {}", d.join(", "));
        let _ = writeln!(s, "n_samples = {}", self.n_samples);
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "quad_abs_tol = {:?}", self.quad_abs_tol);
        let _ = writeln!(s, "quad_rel_tol = {:?}", self.quad_rel_tol);
        let _ = writeln!(s, "g_pairs = {}", self.g_pairs);
        let _ = writeln!(s, "vinf_pairs = {}", self.vinf_pairs);
        let _ = writeln!(s, "hermite_samples = {}", self.hermite_samples);
        let _ = writeln!(s, "i2d_degree = {}", self.i2d_degree);
        let _ = writeln!(s, "out_dir = {}", self.out_dir.display());
        let _ = writeln!(s, "strict = {}", self.strict);
        s
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(EngineError::Config(msg));
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        if self.d.is_empty() {
            return bad("empty degree list".into());
        }
        if let Some(&d) = self.d.iter().find(|&&d| d <= 1) {
            return bad(format!("degree {d} is below 2"));
        }
        if self.d.windows(2).any(|w| w[0] >= w[1]) {
            return bad("degree sweep must be strictly increasing".into());
        }
        if self.n_samples < 3 {
            return bad("n_samples must be at least 3".into());
        }
        for (name, v) in [
            ("g_pairs", self.g_pairs),
            ("vinf_pairs", self.vinf_pairs),
            ("hermite_samples", self.hermite_samples),
        ] {
            if v < 2 {
                return bad(format!("{name} must be at least 2"));
            }
        }
        if self.i2d_degree < 2 {
            return bad("i2d_degree must be at least 2".into());
        }
        for (name, v) in [("quad_abs_tol", self.quad_abs_tol), ("quad_rel_tol", self.quad_rel_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive"));
            }
        }
        Ok(())
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec::default()
            .with_abs_tol(self.quad_abs_tol)
            .with_rel_tol(self.quad_rel_tol)
    }

    pub fn kac_rice_spec(&self) -> KacRiceSpec {
        KacRiceSpec {
            quadrature: self.quadrature(),
            g_pairs: self.g_pairs,
            seed: kss_core::rng::derive_seed(self.master_seed, 0x6b72),
            ..Default::default()
        }
    }

    pub fn vinf_spec(&self) -> VInfSpec {
        VInfSpec {
            quadrature: self.quadrature(),
            mc_pairs: self.vinf_pairs,
            seed: kss_core::rng::derive_seed(self.master_seed, 0x7669),
            ..Default::default()
        }
    }

    pub fn i2_spec(&self) -> I2Spec {
        I2Spec {
            n_mc: self.hermite_samples,
            seed: kss_core::rng::derive_seed(self.master_seed, 0x6832),
            ..Default::default()
        }
    }
}
