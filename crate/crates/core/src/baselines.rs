//! Comparison algorithms.
//!
//! * Independent ETC: every task explores on its own with sphere-uniform
//!   actions for `min(⌈d√T⌉, ⌊T/2⌋)` steps, estimates its coefficient with the
//!   moment estimator and commits.
//! * E2TC-style: the three-stage skeleton of [`crate::mtrl`] with Stage 1
//!   replaced by the pooled squared-reward covariance estimator. Budgets,
//!   Stage 2 and Stage 3 are shared, so with identical seeds any regret
//!   difference comes from the Stage-1 estimator alone.

use rand::Rng;

use crate::env::{BanditInstance, RegretLedger, DEFAULT_TRACE_STRIDE};
use crate::error::{config_err, Result};
use crate::linalg::{argmax_unit_ball, least_squares, Matrix, OrthonormalBasis};
use crate::mtrl::{
    explore_sphere, moment_estimate_theta, run_three_stage, squared_covariance_subspace, MtrlConfig,
    MtrlDiagnostics, SubspaceEstimator,
};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    IndependentEtc,
    E2tc,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 2] = [BaselineKind::IndependentEtc, BaselineKind::E2tc];

    pub fn tag(self) -> &'static str {
        match self {
            BaselineKind::IndependentEtc => "independent_etc",
            BaselineKind::E2tc => "e2tc",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndependentConfig {
    /// Noiseless-oracle mode: exact least squares instead of the moment
    /// estimator (requires zero noise and an exploration budget ≥ d).
    pub exact_least_squares: bool,
    pub trace_stride: u64,
}

impl Default for IndependentConfig {
    fn default() -> Self {
        Self {
            exact_least_squares: false,
            trace_stride: DEFAULT_TRACE_STRIDE,
        }
    }
}

/// `min(⌈d√T⌉, ⌊T/2⌋)`.
pub fn independent_exploration_budget(d: usize, horizon: u64) -> u64 {
    let etc = (d as f64 * (horizon as f64).sqrt()).ceil() as u64;
    etc.min(horizon / 2)
}

/// Per-task explore-then-commit with no sharing across tasks.
/// Returns the ledger and the per-task estimates.
pub fn run_independent_etc<T: Real, R: Rng + ?Sized>(
    instance: &BanditInstance<T>,
    config: &IndependentConfig,
    rng: &mut R,
) -> Result<(RegretLedger<T>, Matrix<T>)> {
    let (d, tasks, horizon) = (instance.dim(), instance.tasks(), instance.horizon());
    let explore = independent_exploration_budget(d, horizon);
    if config.exact_least_squares {
        if instance.noise_std() != T::zero() {
            return Err(config_err("noiseless_oracle", "exact least squares requires noise_std = 0"));
        }
        if explore < d as u64 {
            return Err(config_err("T", format!("exploration budget {explore} is below d = {d}")));
        }
    }
    let mut ledger = RegretLedger::new(tasks, config.trace_stride);
    let estimates = if explore == 0 {
        // T = 1: nothing to explore with; commit to the e₁ convention.
        Matrix::zeros(d, tasks)
    } else {
        let samples = explore_sphere(instance, explore, rng, &mut ledger)?;
        let cols = samples
            .actions
            .iter()
            .zip(&samples.rewards)
            .map(|(a, r)| {
                if config.exact_least_squares {
                    let design = Matrix::from_fn(a.len(), d, |t, j| a[t][j]);
                    least_squares(&design, r)
                } else {
                    moment_estimate_theta(a, r, d)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_columns(d, &cols)?
    };
    let regrets = (0..tasks)
        .map(|m| instance.instant_regret(m, &argmax_unit_ball(estimates.column(m))))
        .collect::<Result<Vec<_>>>()?;
    for _ in explore..horizon {
        for (m, &r) in regrets.iter().enumerate() {
            ledger.record(m, r);
        }
    }
    Ok((ledger, estimates))
}

/// `M̂ = (1/(T1·M))·Σ_t Σ_m r²·a·aᵀ` over all tasks' samples; returns its
/// top-`k` eigenvectors and the full spectrum (descending).
pub fn e2tc_squared_estimator<T: Real>(
    actions: &[Vec<Vec<T>>],
    rewards: &[Vec<T>],
    d: usize,
    k: usize,
) -> Result<(OrthonormalBasis<T>, Vec<T>)> {
    squared_covariance_subspace(actions, rewards, d, k)
}

/// The E2TC-style three-stage run. `config.estimator` is ignored.
pub fn run_e2tc<T: Real, R: Rng + ?Sized>(
    instance: &BanditInstance<T>,
    config: &MtrlConfig,
    rng: &mut R,
) -> Result<(RegretLedger<T>, MtrlDiagnostics<T>)> {
    let config = MtrlConfig {
        estimator: SubspaceEstimator::SquaredCovariance,
        ..config.clone()
    };
    run_three_stage(instance, &config, rng)
}

/// Stage-1 subspace estimate of the squared-covariance estimator alone
/// (no Stage 2/3), for estimator comparisons.
pub fn e2tc_stage1<T: Real, R: Rng + ?Sized>(
    instance: &BanditInstance<T>,
    t1: u64,
    rng: &mut R,
    ledger: &mut RegretLedger<T>,
) -> Result<OrthonormalBasis<T>> {
    if t1 == 0 {
        return Err(config_err("t1", "must be at least 1"));
    }
    let samples = explore_sphere(instance, t1, rng, ledger)?;
    Ok(e2tc_squared_estimator(&samples.actions, &samples.rewards, instance.dim(), instance.rank())?.0)
}
