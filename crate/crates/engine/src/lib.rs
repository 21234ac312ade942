//! Experiment orchestration for KSS root-count studies: configuration,
//! reproducible parallel Monte Carlo with resumable output, and the route
//! comparison behind the `kss` command.

pub mod compare;
pub mod config;
pub mod error;
pub mod experiment;

pub use compare::{compare_routes, ComparisonRow, ComparisonTable, LimitRow};
pub use config::ExperimentConfig;
pub use error::{EngineError, Result};
pub use experiment::{run_experiment, Aggregate, Manifest, MomentSummary, RunOptions, RunReport};
