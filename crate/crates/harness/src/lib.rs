//! Experiment orchestration: seeded replicates run on a worker pool, paired
//! comparisons on shared instances, and CSV/JSON emission.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod stats;

use std::path::PathBuf;

pub use config::{Algorithm, ExperimentConfig, OutputFormat};
pub use error::{HarnessError, Result};
pub use run::{split_seed, RunRecord};
pub use stats::{compare, summarize, Comparison};

#[derive(Debug)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub comparison: Comparison,
    pub files: Vec<PathBuf>,
}

/// Runs `config` with the worker count from the environment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_experiment_with_workers(config, run::workers_from_env())
}

pub fn run_experiment_with_workers(config: &ExperimentConfig, workers: usize) -> Result<ExperimentOutput> {
    let records = run::run_replicates(config, workers)?;
    finish(config, records)
}

/// Runs every algorithm in `algorithms` on the same instances.
pub fn run_comparison(config: &ExperimentConfig, algorithms: &[Algorithm]) -> Result<ExperimentOutput> {
    run_comparison_with_workers(config, algorithms, run::workers_from_env())
}

pub fn run_comparison_with_workers(
    config: &ExperimentConfig,
    algorithms: &[Algorithm],
    workers: usize,
) -> Result<ExperimentOutput> {
    let records = run::run_paired(config, algorithms, workers)?;
    finish(config, records)
}

fn finish(config: &ExperimentConfig, records: Vec<RunRecord>) -> Result<ExperimentOutput> {
    let comparison = compare(&records)?;
    let files = match &config.out_dir {
        Some(dir) => output::write_outputs(dir, config, &records, &comparison)?,
        None => Vec::new(),
    };
    Ok(ExperimentOutput {
        records,
        comparison,
        files,
    })
}
