use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use repbandit::baselines::{run_e2tc, run_independent_etc, IndependentConfig};
use repbandit::env::{BanditInstance, RegretLedger};
use repbandit::lll::run_lll;
use repbandit::mtrl::{run_mtrl, MtrlConfig, SubspaceEstimator};
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::{config_err, HarnessError, Result};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "REPBANDIT_WORKERS";

/// SplitMix64 applied to `master + (index + 1)·γ`. Replicate `i` of an
/// experiment uses `split_seed(master_seed, i)`; its instance is drawn from
/// `split_seed(seed, 0)` and the algorithm's randomness from
/// `split_seed(seed, 1)`.
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecEcho {
    pub d: usize,
    pub k: usize,
    #[serde(rename = "M")]
    pub tasks: usize,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub noise_std: f64,
}

impl SpecEcho {
    pub fn of(config: &ExperimentConfig) -> Self {
        Self {
            d: config.d,
            k: config.k,
            tasks: config.tasks,
            horizon: config.horizon,
            noise_std: config.noise_std,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: u64,
    pub cum_regret: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskRow {
    /// 0-based in memory, 1-based in files.
    pub task: usize,
    pub task_regret: f64,
    pub entered_stage2: bool,
    pub tau_after: usize,
    pub samples_used: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LllExtras {
    pub tasks: Vec<TaskRow>,
    pub tau_final: usize,
    /// Tasks whose Stage 2 extended the basis.
    pub nu: Vec<usize>,
    pub sample_total: u64,
}

impl LllExtras {
    /// Rebuilds `tau_final`, `nu` and `sample_total` from the task rows.
    pub fn from_tasks(tasks: Vec<TaskRow>) -> Self {
        let mut nu = Vec::new();
        let mut prev = 0;
        for row in &tasks {
            if row.tau_after > prev {
                nu.push(row.task);
            }
            prev = row.tau_after;
        }
        Self {
            tau_final: prev,
            sample_total: tasks.iter().map(|r| r.samples_used).sum(),
            nu,
            tasks,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub spec: SpecEcho,
    pub seed_index: usize,
    pub seed: u64,
    pub final_regret: f64,
    pub trace: Vec<TraceRow>,
    pub lll: Option<LllExtras>,
    /// Not written to any output file.
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl RunRecord {
    pub fn without_timing(mut self) -> Self {
        self.wall_seconds = 0.0;
        self
    }
}

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn workers_from_env() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn generate_instance(config: &ExperimentConfig, seed: u64) -> Result<BanditInstance<f64>> {
    Ok(BanditInstance::from_seed(&config.instance_spec().with_seed(split_seed(seed, 0)))?)
}

/// Runs `algorithm` on a given instance with the replicate's algorithm stream.
pub fn run_on_instance(
    algorithm: Algorithm,
    config: &ExperimentConfig,
    instance: &BanditInstance<f64>,
    seed_index: usize,
    seed: u64,
) -> Result<RunRecord> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, 1));
    let stride = config.trace_stride;
    let mtrl = MtrlConfig {
        trace_stride: stride,
        estimator: if config.noiseless_oracle {
            SubspaceEstimator::ExactLeastSquares
        } else {
            SubspaceEstimator::Moment
        },
        ..MtrlConfig::default()
    };
    let (ledger, lll): (RegretLedger<f64>, Option<LllExtras>) = match algorithm {
        Algorithm::Mtrl => (run_mtrl(instance, &mtrl, &mut rng)?.0, None),
        Algorithm::E2tc => (run_e2tc(instance, &mtrl, &mut rng)?.0, None),
        Algorithm::Independent => {
            let cfg = IndependentConfig {
                exact_least_squares: config.noiseless_oracle,
                trace_stride: stride,
            };
            (run_independent_etc(instance, &cfg, &mut rng)?.0, None)
        }
        Algorithm::Lll => {
            let out = run_lll(instance, &config.lll_config(), &mut rng)?;
            let tasks = out
                .tasks
                .iter()
                .map(|r| TaskRow {
                    task: r.task,
                    task_regret: r.regret,
                    entered_stage2: r.entered_stage2,
                    tau_after: r.tau_after,
                    samples_used: r.samples_used,
                })
                .collect();
            let extras = LllExtras::from_tasks(tasks);
            debug_assert_eq!(extras.nu, out.state.nu);
            (out.ledger, Some(extras))
        }
    };
    let trace = ledger
        .trace()
        .into_iter()
        .map(|p| TraceRow {
            t: p.t,
            cum_regret: p.cumulative,
        })
        .collect();
    Ok(RunRecord {
        algorithm,
        spec: SpecEcho::of(config),
        seed_index,
        seed,
        final_regret: ledger.cumulative(),
        trace,
        lll,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// One replicate of `config.algorithm`.
pub fn run_replicate(config: &ExperimentConfig, seed_index: usize) -> Result<RunRecord> {
    let seed = split_seed(config.master_seed, seed_index as u64);
    let instance = generate_instance(config, seed)?;
    run_on_instance(config.algorithm, config, &instance, seed_index, seed)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| config_err("workers", e.to_string()))
}

/// All replicates of `config`, sorted by seed index.
pub fn run_replicates(config: &ExperimentConfig, workers: usize) -> Result<Vec<RunRecord>> {
    config.validate()?;
    pool(workers)?.install(|| {
        (0..config.n_seeds)
            .into_par_iter()
            .map(|i| run_replicate(config, i))
            .collect()
    })
}

/// Every algorithm on the same instance per replicate. Records are sorted by
/// (algorithm order in `algorithms`, seed index).
pub fn run_paired(config: &ExperimentConfig, algorithms: &[Algorithm], workers: usize) -> Result<Vec<RunRecord>> {
    if algorithms.is_empty() {
        return Err(config_err("algos", "need at least one algorithm"));
    }
    for &a in algorithms {
        config.with_algorithm(a).validate()?;
    }
    let per_seed: Vec<Vec<RunRecord>> = pool(workers)?.install(|| {
        (0..config.n_seeds)
            .into_par_iter()
            .map(|i| {
                let seed = split_seed(config.master_seed, i as u64);
                let instance = generate_instance(config, seed)?;
                algorithms
                    .iter()
                    .map(|&a| run_on_instance(a, config, &instance, i, seed))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()
    })?;
    let mut out = Vec::with_capacity(algorithms.len() * config.n_seeds);
    for j in 0..algorithms.len() {
        out.extend(per_seed.iter().map(|runs| runs[j].clone()));
    }
    Ok(out)
}

/// Checks a record's pull accounting against its configuration.
pub fn check_accounting(record: &RunRecord, config: &ExperimentConfig) -> Result<()> {
    let last = record.trace.last().ok_or_else(|| HarnessError::Records("empty trace".into()))?;
    let lll_pure = record.algorithm == Algorithm::Lll && config.mode == crate::config::ModeSetting::PureExploration;
    if !lll_pure {
        let expected = config.tasks as u64 * config.horizon;
        if last.t != expected {
            return Err(HarnessError::Records(format!(
                "{} seed {}: {} pulls, expected {expected}",
                record.algorithm.tag(),
                record.seed_index,
                last.t
            )));
        }
    }
    if record.trace.windows(2).any(|w| w[1].cum_regret < w[0].cum_regret || w[1].t <= w[0].t) {
        return Err(HarnessError::Records("trace is not non-decreasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_seed_is_frozen() {
        assert_eq!(split_seed(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_ne!(split_seed(0, 1), split_seed(1, 0));
        assert_eq!(split_seed(42, 7), split_seed(42, 7));
    }

    #[test]
    fn workers_parse() {
        assert!(workers_from_env() >= 1);
    }

    #[test]
    fn replicate_trace_ends_at_total_pulls() {
        let config = ExperimentConfig {
            tasks: 3,
            horizon: 400,
            d: 4,
            n_seeds: 2,
            ..Default::default()
        };
        for a in [Algorithm::Mtrl, Algorithm::E2tc, Algorithm::Independent, Algorithm::Lll] {
            let c = config.with_algorithm(a);
            let r = run_replicate(&c, 1).unwrap();
            check_accounting(&r, &c).unwrap();
            assert_eq!(r.final_regret, r.trace.last().unwrap().cum_regret);
            assert_eq!(r.lll.is_some(), a == Algorithm::Lll);
        }
    }

    #[test]
    fn lll_extras_rebuild_nu() {
        let row = |task, tau_after| TaskRow {
            task,
            task_regret: 1.0,
            entered_stage2: true,
            tau_after,
            samples_used: 10,
        };
        let e = LllExtras::from_tasks(vec![row(0, 1), row(1, 1), row(2, 2), row(3, 2)]);
        assert_eq!((e.tau_final, e.nu.clone(), e.sample_total), (2, vec![0, 2], 40));
    }
}
