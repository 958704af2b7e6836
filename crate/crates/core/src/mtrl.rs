//! Three-stage explore-then-commit for concurrent tasks with a shared
//! low-rank representation.
//!
//! 1. Subspace exploration: every task plays `T1` sphere-uniform actions.
//!    Each task's coefficient is estimated by the moment estimator
//!    `(d/T1)·Σ r·a`, the estimates are stacked into `Θ̂` (d × M) and `B̂` is
//!    the top-`k` left singular subspace of `Θ̂`.
//! 2. Per-task exploration: every task plays each column of `B̂` for `b`
//!    consecutive steps and fits `Ŵ(m)` by least squares.
//! 3. Commit: every task plays `argmax_{‖a‖≤1} ⟨a, B̂Ŵ(m)⟩` until `T`.
//!
//! Pulls are issued step-major: at each time step every task pulls once.

use rand::Rng;

use crate::env::{BanditInstance, RegretLedger, DEFAULT_TRACE_STRIDE};
use crate::error::{config_err, Error, Result};
use crate::linalg::{
    argmax_unit_ball, least_squares, least_squares_on_subspace, norm, sample_unit_sphere, sub, subspace_distance,
    top_k_eigenvectors, top_k_left_singular_vectors, Matrix, OrthonormalBasis,
};
use crate::scalar::Real;

/// How Stage 1 turns its sphere-uniform samples into a subspace estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SubspaceEstimator {
    /// Per-task moment estimates stacked into `Θ̂`, then truncated SVD.
    #[default]
    Moment,
    /// Noiseless-oracle mode: exact per-task least squares over the Stage-1
    /// actions instead of the moment estimator. Only valid with zero noise.
    ExactLeastSquares,
    /// Pooled squared-reward covariance `(1/(T1·M))·Σ r²·a·aᵀ`, then its
    /// top-`k` eigenvectors.
    SquaredCovariance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MtrlConfig {
    pub t1_override: Option<u64>,
    pub t2_override: Option<u64>,
    pub estimator: SubspaceEstimator,
    pub trace_stride: u64,
}

impl Default for MtrlConfig {
    fn default() -> Self {
        Self {
            t1_override: None,
            t2_override: None,
            estimator: SubspaceEstimator::Moment,
            trace_stride: DEFAULT_TRACE_STRIDE,
        }
    }
}

/// Stage lengths: `T1` sphere steps, `T2 = k·b` subspace steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budgets {
    pub t1: u64,
    pub t2: u64,
    pub b: u64,
}

impl Budgets {
    pub fn commit_steps(&self, horizon: u64) -> u64 {
        horizon - self.t1 - self.t2
    }
}

/// `T1 = ⌈d·√(kT/M)⌉`, `b = ⌈√T⌉`, `T2 = k·b`, unless overridden.
pub fn resolve_budgets(d: usize, k: usize, tasks: usize, horizon: u64, config: &MtrlConfig) -> Result<Budgets> {
    if d == 0 || k == 0 || tasks == 0 || k > d {
        return Err(config_err("k", "need 1 <= k <= d and M >= 1"));
    }
    let t1 = match config.t1_override {
        Some(0) => return Err(config_err("t1", "must be at least 1")),
        Some(t1) => t1,
        None => (d as f64 * (k as f64 * horizon as f64 / tasks as f64).sqrt()).ceil() as u64,
    };
    let (t2, b) = match config.t2_override {
        Some(t2) => {
            if t2 < k as u64 || t2 % k as u64 != 0 {
                return Err(config_err("t2", format!("must be a positive multiple of k = {k}")));
            }
            (t2, t2 / k as u64)
        }
        None => {
            let b = (horizon as f64).sqrt().ceil() as u64;
            (k as u64 * b, b)
        }
    };
    if t1 + t2 > horizon {
        return Err(Error::HorizonTooShort {
            needed: t1 + t2,
            horizon,
        });
    }
    Ok(Budgets { t1, t2, b })
}

/// `(d/n)·Σ_t r_t·a_t`.
pub fn moment_estimate_theta<T: Real>(actions: &[Vec<T>], rewards: &[T], d: usize) -> Result<Vec<T>> {
    if actions.is_empty() {
        return Err(Error::EmptySamples("moment_estimate_theta"));
    }
    if actions.len() != rewards.len() {
        return Err(Error::DimensionMismatch {
            context: "moment_estimate_theta rewards",
            expected: actions.len(),
            found: rewards.len(),
        });
    }
    let mut acc = vec![T::zero(); d];
    for (a, &r) in actions.iter().zip(rewards) {
        if a.len() != d {
            return Err(Error::DimensionMismatch {
                context: "moment_estimate_theta action",
                expected: d,
                found: a.len(),
            });
        }
        for (x, &ai) in acc.iter_mut().zip(a) {
            *x += r * ai;
        }
    }
    let scale = T::of_usize(d) / T::of_usize(actions.len());
    Ok(acc.into_iter().map(|x| x * scale).collect())
}

/// Stage-1 actions and rewards, indexed `[task][step]`.
#[derive(Clone, Debug)]
pub struct SphereSamples<T> {
    pub actions: Vec<Vec<Vec<T>>>,
    pub rewards: Vec<Vec<T>>,
}

/// Every task plays `t1` sphere-uniform actions (step-major).
pub fn explore_sphere<T: Real, R: Rng + ?Sized>(
    instance: &BanditInstance<T>,
    t1: u64,
    rng: &mut R,
    ledger: &mut RegretLedger<T>,
) -> Result<SphereSamples<T>> {
    let (d, tasks) = (instance.dim(), instance.tasks());
    let mut actions = vec![Vec::with_capacity(t1 as usize); tasks];
    let mut rewards = vec![Vec::with_capacity(t1 as usize); tasks];
    for _ in 0..t1 {
        for m in 0..tasks {
            let a = sample_unit_sphere(d, rng)?;
            let r = instance.play(m, &a, rng, ledger)?;
            actions[m].push(a);
            rewards[m].push(r);
        }
    }
    Ok(SphereSamples { actions, rewards })
}

/// Stage-1 output: the subspace estimate plus whatever intermediate the
/// estimator produced.
#[derive(Clone, Debug)]
pub struct SubspaceFit<T> {
    /// Stacked per-task estimates (moment and exact-LS estimators).
    pub theta_hat: Option<Matrix<T>>,
    pub basis: OrthonormalBasis<T>,
    /// Eigenvalues of the pooled covariance (squared-covariance estimator).
    pub spectrum: Option<Vec<T>>,
}

/// Turn Stage-1 samples into `B̂` with the chosen estimator.
pub fn fit_subspace<T: Real>(
    samples: &SphereSamples<T>,
    d: usize,
    k: usize,
    estimator: SubspaceEstimator,
) -> Result<SubspaceFit<T>> {
    match estimator {
        SubspaceEstimator::Moment | SubspaceEstimator::ExactLeastSquares => {
            let cols = samples
                .actions
                .iter()
                .zip(&samples.rewards)
                .map(|(a, r)| match estimator {
                    SubspaceEstimator::Moment => moment_estimate_theta(a, r, d),
                    _ => exact_theta(a, r, d),
                })
                .collect::<Result<Vec<_>>>()?;
            let theta_hat = Matrix::from_columns(d, &cols)?;
            let basis = top_k_left_singular_vectors(&theta_hat, k)?;
            Ok(SubspaceFit {
                theta_hat: Some(theta_hat),
                basis,
                spectrum: None,
            })
        }
        SubspaceEstimator::SquaredCovariance => {
            let (basis, spectrum) = squared_covariance_subspace(&samples.actions, &samples.rewards, d, k)?;
            Ok(SubspaceFit {
                theta_hat: None,
                basis,
                spectrum: Some(spectrum),
            })
        }
    }
}

fn exact_theta<T: Real>(actions: &[Vec<T>], rewards: &[T], d: usize) -> Result<Vec<T>> {
    let design = Matrix::from_fn(actions.len(), d, |t, j| actions[t][j]);
    least_squares(&design, rewards)
}

/// Pooled `M̂ = (1/N)·Σ_{t,m} r²·a·aᵀ` over all tasks' samples, and its top-`k`
/// eigenvectors together with the full (descending) spectrum.
pub fn squared_covariance_subspace<T: Real>(
    actions: &[Vec<Vec<T>>],
    rewards: &[Vec<T>],
    d: usize,
    k: usize,
) -> Result<(OrthonormalBasis<T>, Vec<T>)> {
    let cov = squared_covariance(actions, rewards, d)?;
    top_k_eigenvectors(&cov, k)
}

pub(crate) fn squared_covariance<T: Real>(actions: &[Vec<Vec<T>>], rewards: &[Vec<T>], d: usize) -> Result<Matrix<T>> {
    if actions.is_empty() || actions.iter().any(|a| a.is_empty()) {
        return Err(Error::EmptySamples("squared covariance estimator"));
    }
    let mut cov = Matrix::<T>::zeros(d, d);
    let mut count = 0usize;
    for (task_actions, task_rewards) in actions.iter().zip(rewards) {
        if task_actions.len() != task_rewards.len() {
            return Err(Error::DimensionMismatch {
                context: "squared covariance rewards",
                expected: task_actions.len(),
                found: task_rewards.len(),
            });
        }
        for (a, &r) in task_actions.iter().zip(task_rewards) {
            if a.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "squared covariance action",
                    expected: d,
                    found: a.len(),
                });
            }
            let w = r * r;
            for j in 0..d {
                let wa = w * a[j];
                for i in j..d {
                    cov[(i, j)] += wa * a[i];
                }
            }
            count += 1;
        }
    }
    let scale = T::one() / T::of_usize(count);
    for j in 0..d {
        for i in j..d {
            let v = cov[(i, j)] * scale;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}

/// Stage 1 with the moment estimator: returns `(Θ̂, B̂)`.
pub fn stage1_subspace_exploration<T: Real, R: Rng + ?Sized>(
    instance: &BanditInstance<T>,
    t1: u64,
    rng: &mut R,
    ledger: &mut RegretLedger<T>,
) -> Result<(Matrix<T>, OrthonormalBasis<T>)> {
    if t1 == 0 {
        return Err(config_err("t1", "must be at least 1"));
    }
    let samples = explore_sphere(instance, t1, rng, ledger)?;
    let fit = fit_subspace(&samples, instance.dim(), instance.rank(), SubspaceEstimator::Moment)?;
    Ok((fit.theta_hat.expect("moment estimator yields Θ̂"), fit.basis))
}

/// Stage 2: each task plays column `i` of `B̂` for `b` steps (`i = 1..k`),
/// then `Ŵ(m)` is the least-squares fit on those `k·b` observations.
pub fn stage2_per_task<T: Real, R: Rng + ?Sized>(
    instance: &BanditInstance<T>,
    basis: &OrthonormalBasis<T>,
    b: u64,
    rng: &mut R,
    ledger: &mut RegretLedger<T>,
) -> Result<Matrix<T>> {
    if b == 0 {
        return Err(config_err("t2", "per-column budget b must be at least 1"));
    }
    let (k, tasks) = (basis.width(), instance.tasks());
    let n = (k as u64 * b) as usize;
    let mut actions: Vec<Vec<Vec<T>>> = vec![Vec::with_capacity(n); tasks];
    let mut rewards: Vec<Vec<T>> = vec![Vec::with_capacity(n); tasks];
    for i in 0..k {
        let a = basis.column(i);
        for _ in 0..b {
            for m in 0..tasks {
                let r = instance.play(m, a, rng, ledger)?;
                actions[m].push(a.to_vec());
                rewards[m].push(r);
            }
        }
    }
    let cols = actions
        .iter()
        .zip(&rewards)
        .map(|(a, r)| least_squares_on_subspace(a, r, basis))
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_columns(k, &cols)
}

/// Stage 3: task `m` plays `argmax_unit_ball(θ̂_m)` for `remaining` steps.
/// Returns the committed actions.
pub fn stage3_commit<T: Real>(
    instance: &BanditInstance<T>,
    theta_hats: &Matrix<T>,
    remaining: u64,
    ledger: &mut RegretLedger<T>,
) -> Result<Vec<Vec<T>>> {
    if theta_hats.cols() != instance.tasks() {
        return Err(Error::DimensionMismatch {
            context: "stage3_commit estimates",
            expected: instance.tasks(),
            found: theta_hats.cols(),
        });
    }
    let actions: Vec<Vec<T>> = theta_hats.columns().map(argmax_unit_ball).collect();
    let regrets = actions
        .iter()
        .enumerate()
        .map(|(m, a)| instance.instant_regret(m, a))
        .collect::<Result<Vec<_>>>()?;
    for _ in 0..remaining {
        for (m, &r) in regrets.iter().enumerate() {
            ledger.record(m, r);
        }
    }
    Ok(actions)
}

/// Instrumentation of one three-stage run. Ground-truth comparisons are
/// computed after the fact and never feed back into the algorithm.
#[derive(Clone, Debug)]
pub struct MtrlDiagnostics<T> {
    pub budgets: Budgets,
    pub theta_hat: Option<Matrix<T>>,
    pub b_hat: OrthonormalBasis<T>,
    pub w_hat: Matrix<T>,
    pub spectrum: Option<Vec<T>>,
    /// `‖B̂⊥ᵀB‖` against the true basis.
    pub subspace_error: T,
    /// `‖B̂Ŵ(m) − θ_m‖` per task.
    pub per_task_theta_error: Vec<T>,
    /// Regret accrued in stages 1, 2 and 3.
    pub stage_regret: [T; 3],
}

/// Shared three-stage skeleton; only the Stage-1 estimator varies.
pub fn run_three_stage<T: Real, R: Rng + ?Sized>(
    instance: &BanditInstance<T>,
    config: &MtrlConfig,
    rng: &mut R,
) -> Result<(RegretLedger<T>, MtrlDiagnostics<T>)> {
    let (d, k, tasks, horizon) = (instance.dim(), instance.rank(), instance.tasks(), instance.horizon());
    let budgets = resolve_budgets(d, k, tasks, horizon, config)?;
    if config.estimator == SubspaceEstimator::ExactLeastSquares {
        if instance.noise_std() != T::zero() {
            return Err(config_err("noiseless_oracle", "exact least-squares Stage 1 requires noise_std = 0"));
        }
        if budgets.t1 < d as u64 {
            return Err(config_err("t1", format!("noiseless oracle needs T1 >= d = {d}")));
        }
    }
    let mut ledger = RegretLedger::new(tasks, config.trace_stride);

    let samples = explore_sphere(instance, budgets.t1, rng, &mut ledger)?;
    let fit = fit_subspace(&samples, d, k, config.estimator)?;
    drop(samples);
    let after1 = ledger.cumulative();

    let w_hat = stage2_per_task(instance, &fit.basis, budgets.b, rng, &mut ledger)?;
    let after2 = ledger.cumulative();

    let theta_hats = fit.basis.matrix().matmul(&w_hat)?;
    stage3_commit(instance, &theta_hats, budgets.commit_steps(horizon), &mut ledger)?;

    let subspace_error = subspace_distance(&fit.basis, instance.basis())?;
    let per_task_theta_error = (0..tasks)
        .map(|m| norm(&sub(theta_hats.column(m), instance.theta(m))))
        .collect();
    let stage_regret = [after1, after2 - after1, ledger.cumulative() - after2];
    Ok((
        ledger,
        MtrlDiagnostics {
            budgets,
            theta_hat: fit.theta_hat,
            b_hat: fit.basis,
            w_hat,
            spectrum: fit.spectrum,
            subspace_error,
            per_task_theta_error,
            stage_regret,
        },
    ))
}

/// The multi-task algorithm with the moment estimator (or its noiseless
/// exact-LS oracle, if configured).
pub fn run_mtrl<T: Real, R: Rng + ?Sized>(
    instance: &BanditInstance<T>,
    config: &MtrlConfig,
    rng: &mut R,
) -> Result<(RegretLedger<T>, MtrlDiagnostics<T>)> {
    if config.estimator == SubspaceEstimator::SquaredCovariance {
        return Err(config_err("estimator", "use baselines::run_e2tc for the squared-covariance estimator"));
    }
    run_three_stage(instance, config, rng)
}
