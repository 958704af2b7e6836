//! Lifelong linear bandits: tasks arrive one at a time and share a
//! representation that is learned incrementally.
//!
//! For task `m` with current basis `B̂` of width `τ`:
//!
//! 1. play each column of `B̂` for `n1` steps; `w̃(j)` is the block mean and
//!    `θ̃ = B̂·w̃`;
//! 2. if `‖θ̃‖ ≤ 1 − ε` the basis is missing a direction that matters for
//!    this task: play each `e_j` for `n2` steps, take block means as `θ̂`,
//!    and append the normalized component of `θ̂` orthogonal to `B̂`;
//!    otherwise `θ̂ = θ̃`;
//! 3. in regret mode, commit to `θ̂/‖θ̂‖` until the task's horizon.

use rand::Rng;

use crate::env::{BanditInstance, RegretLedger, DEFAULT_TRACE_STRIDE};
use crate::error::{config_err, Error, Result};
use crate::linalg::{argmax_unit_ball, basis_vector, norm, project_orthogonal_complement, Matrix, OrthonormalBasis};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LllMode {
    #[default]
    PureExploration,
    Regret,
}

/// Confidence term `L` in the sample budgets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LogArg {
    /// `log(2/δ)`, as written in the algorithm's budgets.
    PaperAlg,
    /// `log(2dM/δ)`, the union-bound constant the concentration events need.
    #[default]
    Lemma,
}

/// How the per-block sample counts are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetRule {
    /// `n1 = ⌈4τL/ε²⌉`, `n2 = ⌈16dL/ε²⌉`.
    HighProbability,
    /// `n1 = ⌈τ/ε²⌉`, `n2 = ⌈d/ε²⌉`: the same rates with constants and the
    /// log factor dropped. Default in regret mode, where the high-probability
    /// budgets do not fit a per-task horizon of practical size.
    RateOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LllConfig<T> {
    /// Target accuracy. Ignored in regret mode, where it is derived from the
    /// instance dimensions (see [`regret_mode_epsilon`]).
    pub epsilon: T,
    pub delta: T,
    pub mode: LllMode,
    pub log_arg: LogArg,
    pub budget_rule: BudgetRule,
    pub trace_stride: u64,
}

impl<T: Real> LllConfig<T> {
    pub fn pure_exploration(epsilon: T, delta: T) -> Self {
        Self {
            epsilon,
            delta,
            mode: LllMode::PureExploration,
            log_arg: LogArg::Lemma,
            budget_rule: BudgetRule::HighProbability,
            trace_stride: DEFAULT_TRACE_STRIDE,
        }
    }

    pub fn regret(delta: T) -> Self {
        Self {
            epsilon: T::of(0.5),
            delta,
            mode: LllMode::Regret,
            log_arg: LogArg::Lemma,
            budget_rule: BudgetRule::RateOnly,
            trace_stride: DEFAULT_TRACE_STRIDE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == LllMode::PureExploration && !(self.epsilon > T::zero() && self.epsilon < T::one()) {
            return Err(config_err("epsilon", "must lie in (0, 1)"));
        }
        if !(self.delta > T::zero() && self.delta < T::one()) {
            return Err(config_err("delta", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// The accuracy actually used on `instance`.
    pub fn resolved_epsilon(&self, d: usize, k: usize, tasks: usize, horizon: u64) -> Result<T> {
        match self.mode {
            LllMode::PureExploration => Ok(self.epsilon),
            LllMode::Regret => {
                let eps = regret_mode_epsilon(d, k, tasks, horizon);
                if !(eps > 0.0 && eps < 1.0) {
                    return Err(config_err("T", format!("regret-mode accuracy {eps} is not in (0, 1)")));
                }
                Ok(T::of(eps))
            }
        }
    }
}

/// `ε = ((d²k + k²M)/(MT))^{1/4}`.
pub fn regret_mode_epsilon(d: usize, k: usize, tasks: usize, horizon: u64) -> f64 {
    let (d, k, m, t) = (d as f64, k as f64, tasks as f64, horizon as f64);
    ((d * d * k + k * k * m) / (m * t)).powf(0.25)
}

/// `log(2/δ)` or `log(2dM/δ)`.
pub fn log_term(log_arg: LogArg, delta: f64, d: usize, tasks: usize) -> f64 {
    match log_arg {
        LogArg::PaperAlg => (2.0 / delta).ln(),
        LogArg::Lemma => (2.0 * d as f64 * tasks as f64 / delta).ln(),
    }
}

/// Per-column Stage-1 budget `⌈4τL/ε²⌉`; zero for an empty basis.
pub fn sample_budget_stage1(tau: usize, epsilon: f64, delta: f64, d: usize, tasks: usize, log_arg: LogArg) -> u64 {
    if tau == 0 {
        return 0;
    }
    (4.0 * tau as f64 * log_term(log_arg, delta, d, tasks) / (epsilon * epsilon)).ceil() as u64
}

/// Per-coordinate Stage-2 budget `⌈16dL/ε²⌉`.
pub fn sample_budget_stage2(epsilon: f64, delta: f64, d: usize, tasks: usize, log_arg: LogArg) -> u64 {
    (16.0 * d as f64 * log_term(log_arg, delta, d, tasks) / (epsilon * epsilon)).ceil() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageBudgets {
    /// Pulls per basis column in Stage 1.
    pub n1: u64,
    /// Pulls per coordinate in Stage 2.
    pub n2: u64,
}

impl StageBudgets {
    /// Worst-case exploration pulls for a task that enters Stage 2.
    pub fn worst_case(&self, tau: usize, d: usize) -> u64 {
        tau as u64 * self.n1 + d as u64 * self.n2
    }
}

pub fn stage_budgets(
    rule: BudgetRule,
    tau: usize,
    epsilon: f64,
    delta: f64,
    d: usize,
    tasks: usize,
    log_arg: LogArg,
) -> StageBudgets {
    match rule {
        BudgetRule::HighProbability => StageBudgets {
            n1: sample_budget_stage1(tau, epsilon, delta, d, tasks, log_arg),
            n2: sample_budget_stage2(epsilon, delta, d, tasks, log_arg),
        },
        BudgetRule::RateOnly => {
            let inv = 1.0 / (epsilon * epsilon);
            StageBudgets {
                n1: if tau == 0 { 0 } else { (tau as f64 * inv).ceil() as u64 },
                n2: (d as f64 * inv).ceil() as u64,
            }
        }
    }
}

/// Play each column of `basis` for `n1` steps on task `m`. Returns
/// `(θ̃, w̃)` with `w̃(j)` the block mean and `θ̃ = B̂·w̃`.
pub fn task_specific_exploration<T: Real, R: Rng + ?Sized>(
    instance: &BanditInstance<T>,
    task: usize,
    basis: &OrthonormalBasis<T>,
    n1: u64,
    rng: &mut R,
    ledger: &mut RegretLedger<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    let tau = basis.width();
    if tau == 0 {
        return Ok((vec![T::zero(); instance.dim()], Vec::new()));
    }
    if n1 == 0 {
        return Err(config_err("n1", "per-column budget must be at least 1"));
    }
    let mut w = Vec::with_capacity(tau);
    for j in 0..tau {
        let a = basis.column(j);
        let mut sum = T::zero();
        for _ in 0..n1 {
            sum += instance.play(task, a, rng, ledger)?;
        }
        w.push(sum / T::of(n1 as f64));
    }
    Ok((basis.combine(&w)?, w))
}

/// `‖θ̃‖ ≤ 1 − ε`.
pub fn needs_reestimation<T: Real>(theta_tilde: &[T], epsilon: T) -> bool {
    norm(theta_tilde) <= T::one() - epsilon
}

/// Play each `e_j` for `n2` steps; `θ̂(j)` is the block mean.
pub fn reestimate_theta_coordinatewise<T: Real, R: Rng + ?Sized>(
    instance: &BanditInstance<T>,
    task: usize,
    n2: u64,
    rng: &mut R,
    ledger: &mut RegretLedger<T>,
) -> Result<Vec<T>> {
    if n2 == 0 {
        return Err(config_err("n2", "per-coordinate budget must be at least 1"));
    }
    let d = instance.dim();
    let mut theta = Vec::with_capacity(d);
    for j in 0..d {
        let e = basis_vector::<T>(d, j);
        let mut sum = T::zero();
        for _ in 0..n2 {
            sum += instance.play(task, &e, rng, ledger)?;
        }
        theta.push(sum / T::of(n2 as f64));
    }
    Ok(theta)
}

/// Append `P⊥θ̂/‖P⊥θ̂‖` when `‖P⊥θ̂‖ ≥ ε/4`; otherwise leave the basis as is.
pub fn extend_basis<T: Real>(
    basis: &OrthonormalBasis<T>,
    theta_hat: &[T],
    epsilon: T,
) -> Result<(OrthonormalBasis<T>, bool)> {
    let p = project_orthogonal_complement(basis, theta_hat)?;
    let pn = norm(&p);
    if basis.width() == basis.dim() {
        debug_assert!(pn.as_f64() < 1e-6, "complement of a full basis must vanish");
        return Ok((basis.clone(), false));
    }
    if pn < epsilon / T::of(4.0) {
        return Ok((basis.clone(), false));
    }
    let mut unit: Vec<T> = p.iter().map(|&x| x / pn).collect();
    // One re-orthogonalization pass against round-off.
    let again = project_orthogonal_complement(basis, &unit)?;
    let n2 = norm(&again);
    unit = again.into_iter().map(|x| x / n2).collect();
    let mut out = basis.clone();
    out.push_unit_column(&unit)?;
    Ok((out, true))
}

/// Learner state carried across tasks.
#[derive(Clone, Debug)]
pub struct LllState<T> {
    pub basis: OrthonormalBasis<T>,
    /// Tasks (0-based) whose Stage 2 appended a basis column, in order.
    pub nu: Vec<usize>,
    /// Final estimate `θ̂_m` per task (columns).
    pub theta_hats: Matrix<T>,
    /// Exploration pulls per task (commit pulls excluded).
    pub samples_used: Vec<u64>,
    /// Basis width after each task.
    pub tau_history: Vec<usize>,
}

impl<T: Real> LllState<T> {
    pub fn new(d: usize) -> Self {
        Self {
            basis: OrthonormalBasis::empty(d),
            nu: Vec::new(),
            theta_hats: Matrix::zeros(d, 0),
            samples_used: Vec::new(),
            tau_history: Vec::new(),
        }
    }

    pub fn tau(&self) -> usize {
        self.basis.width()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskRecord<T> {
    pub task: usize,
    pub regret: T,
    pub entered_stage2: bool,
    pub extended: bool,
    pub tau_before: usize,
    pub tau_after: usize,
    pub n1: u64,
    pub n2: u64,
    pub samples_used: u64,
    /// Pulls spent committing (regret mode only).
    pub commit_pulls: u64,
}

#[derive(Clone, Debug)]
pub struct LllOutcome<T> {
    pub state: LllState<T>,
    pub ledger: RegretLedger<T>,
    /// Total exploration pulls over all tasks.
    pub sample_total: u64,
    pub epsilon: T,
    pub tasks: Vec<TaskRecord<T>>,
}

/// Process tasks `0..M` in order.
pub fn run_lll<T: Real, R: Rng + ?Sized>(
    instance: &BanditInstance<T>,
    config: &LllConfig<T>,
    rng: &mut R,
) -> Result<LllOutcome<T>> {
    config.validate()?;
    let (d, k, tasks, horizon) = (instance.dim(), instance.rank(), instance.tasks(), instance.horizon());
    let epsilon = config.resolved_epsilon(d, k, tasks, horizon)?;
    let (eps, delta) = (epsilon.as_f64(), config.delta.as_f64());

    let mut state = LllState::new(d);
    let mut ledger = RegretLedger::new(tasks, config.trace_stride);
    let mut records = Vec::with_capacity(tasks);
    let mut sample_total = 0u64;

    for m in 0..tasks {
        let tau_before = state.tau();
        let budgets = stage_budgets(config.budget_rule, tau_before, eps, delta, d, tasks, config.log_arg);
        if config.mode == LllMode::Regret {
            let needed = budgets.worst_case(tau_before, d);
            if needed > horizon {
                return Err(Error::HorizonTooShort { needed, horizon });
            }
        }
        let regret_before = ledger.cumulative();
        let pulls_before = ledger.pulls();

        let (theta_tilde, _) = task_specific_exploration(instance, m, &state.basis, budgets.n1, rng, &mut ledger)?;
        let entered = needs_reestimation(&theta_tilde, epsilon);
        let (theta_hat, extended) = if entered {
            let theta_hat = reestimate_theta_coordinatewise(instance, m, budgets.n2, rng, &mut ledger)?;
            let (basis, extended) = extend_basis(&state.basis, &theta_hat, epsilon)?;
            state.basis = basis;
            if extended {
                state.nu.push(m);
            }
            (theta_hat, extended)
        } else {
            (theta_tilde, false)
        };
        let used = ledger.pulls() - pulls_before;

        let mut commit_pulls = 0;
        if config.mode == LllMode::Regret {
            let action = argmax_unit_ball(&theta_hat);
            let r = instance.instant_regret(m, &action)?;
            commit_pulls = horizon - used;
            for _ in 0..commit_pulls {
                ledger.record(m, r);
            }
        }

        state.theta_hats.push_column(&theta_hat)?;
        state.samples_used.push(used);
        state.tau_history.push(state.tau());
        sample_total += used;
        records.push(TaskRecord {
            task: m,
            regret: ledger.cumulative() - regret_before,
            entered_stage2: entered,
            extended,
            tau_before,
            tau_after: state.tau(),
            n1: budgets.n1,
            n2: if entered { budgets.n2 } else { 0 },
            samples_used: used,
            commit_pulls,
        });
    }

    Ok(LllOutcome {
        state,
        ledger,
        sample_total,
        epsilon,
        tasks: records,
    })
}

/// `τ_M` against the `O(k log(k/ε))` growth bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauGrowthReport {
    pub tau: usize,
    /// `k·⌈ln(k/ε) + 1⌉`.
    pub scale: u64,
    /// `4·scale`.
    pub threshold: u64,
    pub within_bound: bool,
}

pub fn tau_growth_report<T: Real>(state: &LllState<T>, k: usize, epsilon: T) -> TauGrowthReport {
    let scale = tau_growth_scale(k, epsilon.as_f64());
    let threshold = 4 * scale;
    TauGrowthReport {
        tau: state.tau(),
        scale,
        threshold,
        within_bound: state.tau() as u64 <= threshold,
    }
}

pub fn tau_growth_scale(k: usize, epsilon: f64) -> u64 {
    k as u64 * ((k as f64 / epsilon).ln() + 1.0).ceil() as u64
}
