use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kss_core::asymptotics::{m_kj, v_infinity, VInfRoute};
use kss_core::hermite::{f_tilde_22, i2d_lower_bound, parseval_sum};
use kss_core::kacrice::variance_finite_d;
use kss_core::rng::derive_seed;
use kss_core::rootcount::count;
use kss_core::KssSystem;
use kss_engine::experiment::{with_workers, write_text};
use kss_engine::{compare_routes, run_experiment, EngineError, ExperimentConfig, Result, RunOptions};
use serde::Serialize;
use serde_json::json;

/// Real roots of Kostlan-Shub-Smale random polynomial systems.
///
/// Settings are layered: built-in defaults, then `--config <file>`
/// (`key = value` lines), then `KSS_<KEY>` environment variables (for
/// example `KSS_N_SAMPLES=500`), then the flags below.
#[derive(Parser, Debug)]
#[command(name = "kss", version)]
struct Cli {
    /// Number of equations and variables.
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Degree, or a list such as `10,50,200` or `2..6`.
    #[arg(long, global = true)]
    d: Option<String>,
    /// Monte Carlo samples.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Fail on any uncertified root count.
    #[arg(long, global = true)]
    strict: bool,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Route {
    ChiProduct,
    GaussianMatrix,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw one system and print it as JSON.
    Sample {
        /// Use the seed of this experiment replicate instead of `--seed` itself.
        #[arg(long)]
        index: Option<u64>,
    },
    /// Count the real roots of one system (drawn, or read from `--input`).
    Count {
        #[arg(long)]
        index: Option<u64>,
        /// System JSON as printed by `sample`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Monte Carlo moments of the root count over the degree sweep.
    McMoments {
        /// Keep rows already in the output directory.
        #[arg(long)]
        resume: bool,
        /// Stop after this many new replicates.
        #[arg(long)]
        max_new: Option<usize>,
    },
    /// Finite-degree variance from the Kac-Rice integral.
    KacRice,
    /// The limit variance.
    VInf {
        #[arg(long, value_enum)]
        route: Option<Route>,
    },
    /// Hermite coefficients of |det| and the second-chaos lower bound.
    HermiteCheck {
        /// Largest |beta| in the Parseval sum.
        #[arg(long, default_value_t = 4)]
        order: u32,
    },
    /// Monte Carlo against Kac-Rice per degree, then the limit row.
    Compare,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut c = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    c.merge_env(std::env::vars())?;
    let flag = |name: &str, r: std::result::Result<(), String>| r.map_err(|e| EngineError::Config(format!("--{name}: {e}")));
    if let Some(m) = cli.m {
        c.m = m;
    }
    if let Some(d) = &cli.d {
        flag("d", c.set("d", d))?;
    }
    if let Some(n) = cli.n {
        c.n_samples = n;
    }
    if let Some(s) = cli.seed {
        c.master_seed = s;
    }
    if let Some(w) = cli.workers {
        c.workers = w;
    }
    if cli.strict {
        c.strict = true;
    }
    if let Some(o) = &cli.out {
        c.out_dir = o.clone();
    }
    c.validate()?;
    Ok(c)
}

/// Prints `value` and, when `--out` was given, saves it as `<out>/<name>.json`.
fn emit<T: Serialize>(cli: &Cli, name: &str, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    print!("{text}");
    if let Some(dir) = &cli.out {
        write_text(&dir.join(format!("{name}.json")), &text)?;
    }
    Ok(())
}

fn system_seed(c: &ExperimentConfig, index: Option<u64>) -> u64 {
    index.map_or(c.master_seed, |i| derive_seed(c.master_seed, i))
}

fn run(cli: &Cli) -> Result<()> {
    let c = build_config(cli)?;
    let d0 = c.d[0];
    match &cli.command {
        Command::Sample { index } => {
            let sys = KssSystem::sample(c.m, d0, system_seed(&c, *index))?;
            let text = sys.to_json()? + "\n";
            print!("{text}");
            if let Some(dir) = &cli.out {
                write_text(&dir.join("system.json"), &text)?;
            }
        }
        Command::Count { index, input } => {
            let sys = match input {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| EngineError::io(p, e))?;
                    KssSystem::from_json(&text)?
                }
                None => KssSystem::sample(c.m, d0, system_seed(&c, *index))?,
            };
            let r = count(&sys)?;
            emit(cli, "count", &json!({ "m": sys.m(), "d": sys.d(), "seed": sys.seed(), "result": r }))?;
            if c.strict && !r.certified {
                return Err(EngineError::Uncertified { count: 1 });
            }
        }
        Command::McMoments { resume, max_new } => {
            let report = run_experiment(
                &c,
                &RunOptions {
                    resume: *resume,
                    max_new: *max_new,
                },
            )?;
            print!("{}", serde_json::to_string_pretty(&report.aggregate)? + "\n");
            if !report.manifest.complete {
                log::warn!("run incomplete; rerun with --resume");
            }
            report.check(c.strict)?;
        }
        Command::KacRice => {
            let spec = c.kac_rice_spec();
            let rows = with_workers(c.workers, || {
                c.d.iter()
                    .map(|&d| variance_finite_d(d as u64, c.m, &spec))
                    .collect::<kss_core::Result<Vec<_>>>()
            })??;
            emit(cli, "kac_rice", &rows)?;
        }
        Command::VInf { route } => {
            let mut spec = c.vinf_spec();
            spec.route = route.map(|r| match r {
                Route::ChiProduct => VInfRoute::ChiProduct,
                Route::GaussianMatrix => VInfRoute::GaussianMatrix,
            });
            let v = with_workers(c.workers, || v_infinity(c.m, &spec))??;
            emit(cli, "v_inf", &v)?;
        }
        Command::HermiteCheck { order } => {
            let ispec = c.i2_spec();
            let out = with_workers(c.workers, || -> Result<serde_json::Value> {
                let f = f_tilde_22(c.m, c.hermite_samples, ispec.seed)?;
                let exact: f64 = (1..=c.m).map(|k| m_kj(k, 1)).product::<kss_core::Result<f64>>()?;
                let p = parseval_sum(c.m, *order, c.hermite_samples, ispec.seed)?;
                let b = i2d_lower_bound(c.i2d_degree, c.m, &ispec)?;
                Ok(json!({
                    "m": c.m,
                    "f_tilde_22": f,
                    "mean_abs_det_exact": exact,
                    "parseval": { "order": order, "sum": p, "second_moment": (1..=c.m as u64).product::<u64>() },
                    "i2d": b,
                }))
            })??;
            emit(cli, "hermite_check", &out)?;
        }
        Command::Compare => {
            let table = compare_routes(c.m, &c.d, &c)?;
            print!("{}", table.to_text());
            if let Some(dir) = &cli.out {
                write_text(&dir.join("comparison.json"), &(serde_json::to_string_pretty(&table)? + "\n"))?;
                write_text(&dir.join("comparison.csv"), &table.to_csv()?)?;
            }
            let flagged = table.flagged();
            if flagged > 0 {
                eprintln!("{flagged} row(s) flagged");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
