//! Monte Carlo experiments over a degree sweep, with resumable CSV output.
//!
//! Files in the output directory:
//!
//! * `replicates_m{m}_d{d}.csv`: one row per replicate, sorted by index.
//! * `aggregate.json`: moments per degree. Contains nothing that depends on
//!   scheduling, so it is byte-identical across worker counts.
//! * `manifest.json`: progress, failed replicates and timings.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kss_core::rng::derive_seed;
use kss_core::rootcount::{run_replicate, Replicate};
use kss_core::stats::SampleMoments;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{EngineError, Result};

/// Bumped whenever a CSV column or JSON key changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 9] = [
    "index",
    "seed",
    "m",
    "d",
    "count",
    "certified",
    "unresolved_regions",
    "redraws",
    "wall_time_ms",
];

/// Replicates per batch; the CSV is flushed after each.
const BATCH: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub index: u64,
    pub seed: u64,
    pub m: usize,
    pub d: u32,
    pub count: u64,
    pub certified: bool,
    pub unresolved_regions: u64,
    pub redraws: u32,
    pub wall_time_ms: f64,
}

impl From<&Replicate> for ReplicateRow {
    fn from(r: &Replicate) -> Self {
        Self {
            index: r.index,
            seed: r.seed,
            m: r.m,
            d: r.d,
            count: r.result.count,
            certified: r.result.certified,
            unresolved_regions: r.result.unresolved_regions,
            redraws: r.redraws,
            wall_time_ms: r.wall_time_ms,
        }
    }
}

/// Moments of the real-root count at one degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub m: usize,
    pub d: u32,
    /// Replicates that produced a count.
    pub n: usize,
    pub failed: usize,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    /// Delete-one jackknife.
    pub se_variance: f64,
    /// From the fourth sample moment, for comparison.
    pub se_variance_moment: f64,
    /// `mean / d^{m/2}`.
    pub scaled_mean: f64,
    pub scaled_mean_se: f64,
    /// `variance / d^{m/2}`.
    pub scaled_variance: f64,
    pub scaled_variance_se: f64,
    pub uncertified: usize,
    pub uncertified_fraction: f64,
    pub redraws: u64,
    pub max_count: u64,
    /// `d^m`.
    pub bezout_cap: u64,
}

impl MomentSummary {
    /// `rows` must be sorted by index.
    pub fn from_rows(m: usize, d: u32, rows: &[ReplicateRow], failed: usize) -> Self {
        let xs: Vec<f64> = rows.iter().map(|r| r.count as f64).collect();
        let s = SampleMoments::from_samples(&xs);
        let scale = (d as f64).powf(m as f64 / 2.0);
        let uncertified = rows.iter().filter(|r| !r.certified).count();
        Self {
            m,
            d,
            n: s.n,
            failed,
            mean: s.mean,
            variance: s.variance,
            se_mean: s.se_mean,
            se_variance: s.se_variance_jackknife,
            se_variance_moment: s.se_variance,
            scaled_mean: s.mean / scale,
            scaled_mean_se: s.se_mean / scale,
            scaled_variance: s.variance / scale,
            scaled_variance_se: s.se_variance_jackknife / scale,
            uncertified,
            uncertified_fraction: uncertified as f64 / s.n.max(1) as f64,
            redraws: rows.iter().map(|r| r.redraws as u64).sum(),
            max_count: rows.iter().map(|r| r.count).max().unwrap_or(0),
            bezout_cap: (d as u64).saturating_pow(m as u32),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub schema_version: u32,
    pub m: usize,
    pub n_samples: usize,
    pub master_seed: u64,
    pub results: Vec<MomentSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailedReplicate {
    pub index: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub d: u32,
    pub csv: String,
    pub completed: usize,
    /// Rows found on disk and reused.
    pub resumed: usize,
    /// Rows computed by this invocation.
    pub computed: usize,
    pub failed: Vec<FailedReplicate>,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    /// The parts of the config that determine the numbers.
    pub fingerprint: String,
    pub n_samples: usize,
    pub complete: bool,
    pub workers: usize,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Reuse rows already on disk and compute only the missing replicates.
    pub resume: bool,
    /// Stop after this many new replicates (the run is left incomplete).
    pub max_new: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub aggregate: Aggregate,
    pub manifest: Manifest,
    pub aggregate_path: PathBuf,
    pub manifest_path: PathBuf,
}

impl RunReport {
    pub fn failed(&self) -> usize {
        self.manifest.entries.iter().map(|e| e.failed.len()).sum()
    }

    pub fn uncertified(&self) -> usize {
        self.aggregate.results.iter().map(|r| r.uncertified).sum()
    }

    /// Error for failed replicates, or for uncertified counts under `strict`.
    pub fn check(&self, strict: bool) -> Result<()> {
        let failed = self.failed();
        if failed > 0 {
            return Err(EngineError::PartialFailure { count: failed });
        }
        let unc = self.uncertified();
        if strict && unc > 0 {
            return Err(EngineError::Uncertified { count: unc });
        }
        Ok(())
    }
}

/// Runs `f` on a pool of `workers` threads (0: rayon's default).
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EngineError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

fn fingerprint(c: &ExperimentConfig) -> String {
    let d: Vec<String> = c.d.iter().map(u32::to_string).collect();
    format!("m={};d={};n_samples={};master_seed={}", c.m, d.join(","), c.n_samples, c.master_seed)
}

pub fn csv_name(m: usize, d: u32) -> String {
    format!("replicates_m{m}_d{d}.csv")
}

/// Rows of an existing CSV; a truncated final line (interrupted write) is
/// dropped.
pub fn read_rows(path: &Path) -> Result<Vec<ReplicateRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(EngineError::ResumeMismatch(path.to_path_buf()));
    }
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        match rec {
            Ok(r) => rows.push(r),
            Err(e) => {
                log::warn!("{}: ignoring unreadable row: {e}", path.display());
                break;
            }
        }
    }
    Ok(rows)
}

fn write_rows(path: &Path, rows: &[ReplicateRow]) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    {
        let mut w = csv::Writer::from_path(&tmp)?;
        if rows.is_empty() {
            w.write_record(CSV_HEADER)?;
        }
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| EngineError::io(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| EngineError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| EngineError::io(path, e))
}

/// Checks that reused rows belong to this experiment.
fn check_rows(rows: &[ReplicateRow], c: &ExperimentConfig, d: u32, path: &Path) -> Result<()> {
    for r in rows {
        let own = r.m == c.m
            && r.d == d
            && (r.index as usize) < c.n_samples
            && (r.redraws > 0 || r.seed == derive_seed(c.master_seed, r.index));
        if !own {
            return Err(EngineError::ResumeMismatch(path.to_path_buf()));
        }
    }
    Ok(())
}

/// Computes replicates `indices` in parallel; results come back in index order.
pub fn simulate(m: usize, d: u32, master_seed: u64, indices: &[u64]) -> Vec<(u64, kss_core::Result<Replicate>)> {
    indices
        .par_iter()
        .map(|&i| (i, run_replicate(m, d, master_seed, i)))
        .collect()
}

/// Runs or resumes the experiment described by `config`, writing into
/// `config.out_dir`.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport> {
    config.validate()?;
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| EngineError::io(dir, e))?;
    let manifest_path = dir.join("manifest.json");
    let aggregate_path = dir.join("aggregate.json");
    let fp = fingerprint(config);
    if opts.resume && manifest_path.exists() {
        let text = std::fs::read_to_string(&manifest_path).map_err(|e| EngineError::io(&manifest_path, e))?;
        let old: Manifest = serde_json::from_str(&text)?;
        if old.fingerprint != fp || old.schema_version != SCHEMA_VERSION {
            return Err(EngineError::ResumeMismatch(dir.clone()));
        }
    }
    let mut budget = opts.max_new.unwrap_or(usize::MAX);
    let mut entries = Vec::new();
    let mut results = Vec::new();
    for &d in &config.d {
        let start = Instant::now();
        let name = csv_name(config.m, d);
        let path = dir.join(&name);
        let mut done: BTreeMap<u64, ReplicateRow> = BTreeMap::new();
        if opts.resume && path.exists() {
            let rows = read_rows(&path)?;
            check_rows(&rows, config, d, &path)?;
            for r in rows {
                done.insert(r.index, r);
            }
        }
        let resumed = done.len();
        // Rewrite what was kept so appends start from a clean file.
        write_rows(&path, &done.values().cloned().collect::<Vec<_>>())?;
        let missing: Vec<u64> = (0..config.n_samples as u64).filter(|i| !done.contains_key(i)).collect();
        let todo = &missing[..missing.len().min(budget)];
        budget -= todo.len();
        let mut failed = Vec::new();
        let mut computed = 0;
        for batch in todo.chunks(BATCH) {
            let out = with_workers(config.workers, || simulate(config.m, d, config.master_seed, batch))?;
            let file = OpenOptions::new()
                .append(true)
                .open(&path)
                .map_err(|e| EngineError::io(&path, e))?;
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
            for (index, res) in out {
                match res {
                    Ok(rep) => {
                        let row = ReplicateRow::from(&rep);
                        w.serialize(&row)?;
                        done.insert(index, row);
                        computed += 1;
                    }
                    Err(e) => {
                        log::error!("m={} d={d} replicate {index}: {e}", config.m);
                        failed.push(FailedReplicate {
                            index,
                            error: e.to_string(),
                        });
                    }
                }
            }
            w.flush().map_err(|e| EngineError::io(&path, e))?;
        }
        let rows: Vec<ReplicateRow> = done.into_values().collect();
        write_rows(&path, &rows)?;
        if rows.len() >= 3 {
            results.push(MomentSummary::from_rows(config.m, d, &rows, failed.len()));
        }
        entries.push(ManifestEntry {
            d,
            csv: name,
            completed: rows.len(),
            resumed,
            computed,
            failed,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }
    let complete = entries.iter().all(|e| e.completed == config.n_samples);
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        fingerprint: fp,
        n_samples: config.n_samples,
        complete,
        workers: config.workers,
        entries,
    };
    write_json(&manifest_path, &manifest)?;
    let aggregate = Aggregate {
        schema_version: SCHEMA_VERSION,
        m: config.m,
        n_samples: config.n_samples,
        master_seed: config.master_seed,
        results,
    };
    if complete {
        write_json(&aggregate_path, &aggregate)?;
    } else if aggregate_path.exists() {
        std::fs::remove_file(&aggregate_path).map_err(|e| EngineError::io(&aggregate_path, e))?;
    }
    Ok(RunReport {
        aggregate,
        manifest,
        aggregate_path,
        manifest_path,
    })
}

/// Moments at one degree without touching the filesystem.
pub fn moments_in_memory(m: usize, d: u32, n: usize, master_seed: u64, workers: usize) -> Result<MomentSummary> {
    if n < 3 {
        return Err(EngineError::Config("need at least three samples".into()));
    }
    let indices: Vec<u64> = (0..n as u64).collect();
    let out = with_workers(workers, || simulate(m, d, master_seed, &indices))?;
    let mut rows = Vec::with_capacity(n);
    let mut failed = 0;
    for (index, res) in out {
        match res {
            Ok(r) => rows.push(ReplicateRow::from(&r)),
            Err(e) => {
                log::error!("m={m} d={d} replicate {index}: {e}");
                failed += 1;
            }
        }
    }
    if rows.len() < 3 {
        return Err(EngineError::PartialFailure { count: failed });
    }
    Ok(MomentSummary::from_rows(m, d, &rows, failed))
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(p) = path.parent() {
        std::fs::create_dir_all(p).map_err(|e| EngineError::io(p, e))?;
    }
    let mut f = File::create(path).map_err(|e| EngineError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| EngineError::io(path, e))
}
