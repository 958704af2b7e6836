//! Synthetic multi-task linear bandit world.
//!
//! Task `m` has coefficient `θ_m = B·w_m` with `B` a `d × k` orthonormal
//! basis shared by all tasks and `‖θ_m‖ = 1`. Actions live in the unit
//! ball; pulling `a` on task `m` returns `⟨a, θ_m⟩ + σ·η` with `η ~ N(0, 1)`.
//! Regret is accounted in expectation: `1 − ⟨a, θ_m⟩` per pull.
//!
//! Task indices are 0-based throughout the API.

use rand::{Rng, SeedableRng};

use crate::error::{config_err, Error, Result};
use crate::linalg::{
    dot, kth_singular_value, norm, orthonormality_deviation, random_orthogonal, sample_unit_sphere, Matrix,
    OrthonormalBasis,
};
use crate::scalar::Real;

/// Dimensions, horizon, noise level and master seed of an instance.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec<T> {
    /// Ambient dimension `d`.
    pub dim: usize,
    /// Representation dimension `k`.
    pub rank: usize,
    /// Number of tasks `M`.
    pub tasks: usize,
    /// Per-task horizon `T`.
    pub horizon: u64,
    pub noise_std: T,
    pub seed: u64,
}

impl<T: Real> InstanceSpec<T> {
    pub fn new(dim: usize, rank: usize, tasks: usize, horizon: u64) -> Self {
        Self {
            dim,
            rank,
            tasks,
            horizon,
            noise_std: T::one(),
            seed: 0,
        }
    }

    pub fn with_noise(mut self, noise_std: T) -> Self {
        self.noise_std = noise_std;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(config_err("d", "must be at least 1"));
        }
        if self.rank == 0 || self.rank > self.dim {
            return Err(config_err("k", format!("need 1 <= k <= d = {}, got {}", self.dim, self.rank)));
        }
        if self.tasks < self.rank {
            return Err(config_err("M", format!("need M >= k = {}, got {}", self.rank, self.tasks)));
        }
        if self.horizon == 0 {
            return Err(config_err("T", "must be at least 1"));
        }
        if !(self.noise_std >= T::zero()) || !self.noise_std.is_finite() {
            return Err(config_err("noise_std", "must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Ground truth of a simulated world. Immutable once generated.
#[derive(Clone, Debug)]
pub struct BanditInstance<T> {
    spec: InstanceSpec<T>,
    basis: OrthonormalBasis<T>,
    weights: Matrix<T>,
    theta: Matrix<T>,
}

impl<T: Real> BanditInstance<T> {
    /// `B` = first `k` columns of a Haar orthogonal matrix, `w_m` uniform on
    /// the `k`-sphere, `Θ = B·W`.
    pub fn generate<R: Rng + ?Sized>(spec: &InstanceSpec<T>, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let q = random_orthogonal::<T, _>(spec.dim, rng)?;
        let basis = OrthonormalBasis::new(q.leading_columns(spec.rank))?;
        let cols = (0..spec.tasks)
            .map(|_| sample_unit_sphere(spec.rank, rng))
            .collect::<Result<Vec<_>>>()?;
        let weights = Matrix::from_columns(spec.rank, &cols)?;
        Self::from_parts(spec.clone(), basis, weights)
    }

    /// Deterministic generation from `spec.seed`.
    pub fn from_seed(spec: &InstanceSpec<T>) -> Result<Self> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
        Self::generate(spec, &mut rng)
    }

    /// Assemble from an explicit basis and weights; checks all invariants.
    pub fn from_parts(spec: InstanceSpec<T>, basis: OrthonormalBasis<T>, weights: Matrix<T>) -> Result<Self> {
        spec.validate()?;
        if basis.dim() != spec.dim || basis.width() != spec.rank {
            return Err(config_err("B", "basis shape does not match the spec"));
        }
        if weights.rows() != spec.rank || weights.cols() != spec.tasks {
            return Err(config_err("W", "weight matrix shape does not match the spec"));
        }
        let theta = basis.matrix().matmul(&weights)?;
        let inst = Self {
            spec,
            basis,
            weights,
            theta,
        };
        inst.check_invariants()?;
        Ok(inst)
    }

    /// Unit-norm tasks, rank-`k` Θ and orthonormal `B`.
    pub fn check_invariants(&self) -> Result<()> {
        for m in 0..self.spec.tasks {
            let n = norm(self.theta.column(m)).as_f64();
            if (n - 1.0).abs() > 1e3 * T::TINY.max(1e-13) {
                return Err(config_err("W", format!("task {m} has ‖θ‖ = {n}")));
            }
        }
        let dev = orthonormality_deviation(self.basis.matrix());
        if dev >= T::ORTHO_TOL {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
        let sk = kth_singular_value(&self.theta, self.spec.rank)?;
        if sk.as_f64() <= T::ORTHO_TOL {
            return Err(config_err("W", "Θ is rank deficient"));
        }
        Ok(())
    }

    pub fn spec(&self) -> &InstanceSpec<T> {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn rank(&self) -> usize {
        self.spec.rank
    }

    pub fn tasks(&self) -> usize {
        self.spec.tasks
    }

    pub fn horizon(&self) -> u64 {
        self.spec.horizon
    }

    pub fn noise_std(&self) -> T {
        self.spec.noise_std
    }

    pub fn basis(&self) -> &OrthonormalBasis<T> {
        &self.basis
    }

    pub fn weights(&self) -> &Matrix<T> {
        &self.weights
    }

    pub fn theta_matrix(&self) -> &Matrix<T> {
        &self.theta
    }

    pub fn theta(&self, task: usize) -> &[T] {
        self.theta.column(task)
    }

    fn check_pull(&self, task: usize, action: &[T]) -> Result<()> {
        if task >= self.spec.tasks {
            return Err(Error::TaskIndex {
                index: task,
                count: self.spec.tasks,
            });
        }
        if action.len() != self.spec.dim {
            return Err(Error::DimensionMismatch {
                context: "action",
                expected: self.spec.dim,
                found: action.len(),
            });
        }
        let n = norm(action).as_f64();
        if !(n <= 1.0 + T::ACTION_TOL) {
            return Err(Error::InfeasibleAction { norm: n });
        }
        Ok(())
    }

    /// Noisy reward `⟨a, θ_m⟩ + σ·η`.
    pub fn pull<R: Rng + ?Sized>(&self, task: usize, action: &[T], rng: &mut R) -> Result<T> {
        self.check_pull(task, action)?;
        let mean = dot(action, self.theta(task));
        if self.spec.noise_std == T::zero() {
            Ok(mean)
        } else {
            Ok(mean + self.spec.noise_std * T::standard_normal(rng))
        }
    }

    /// Expected regret `1 − ⟨a, θ_m⟩` of one pull, clamped to `[0, 2]`
    /// against round-off.
    pub fn instant_regret(&self, task: usize, action: &[T]) -> Result<T> {
        self.check_pull(task, action)?;
        let r = T::one() - dot(action, self.theta(task));
        Ok(r.max(T::zero()).min(T::of(2.0)))
    }

    /// Pull and account in one step.
    pub fn play<R: Rng + ?Sized>(
        &self,
        task: usize,
        action: &[T],
        rng: &mut R,
        ledger: &mut RegretLedger<T>,
    ) -> Result<T> {
        let reward = self.pull(task, action, rng)?;
        ledger.record(task, self.instant_regret(task, action)?);
        Ok(reward)
    }
}

/// One thinned trace point: global pull count, task of that pull, and the
/// cumulative expected regret after it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint<T> {
    pub t: u64,
    pub task: usize,
    pub cumulative: T,
}

/// Per-pull expected-regret accounting.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretLedger<T> {
    per_task: Vec<T>,
    per_task_pulls: Vec<u64>,
    cumulative: T,
    pulls: u64,
    stride: u64,
    trace: Vec<TracePoint<T>>,
    last: Option<TracePoint<T>>,
    min_instant: T,
    max_instant: T,
}

pub const DEFAULT_TRACE_STRIDE: u64 = 10;

impl<T: Real> RegretLedger<T> {
    /// `stride = 0` disables the trace.
    pub fn new(tasks: usize, stride: u64) -> Self {
        Self {
            per_task: vec![T::zero(); tasks],
            per_task_pulls: vec![0; tasks],
            cumulative: T::zero(),
            pulls: 0,
            stride,
            trace: Vec::new(),
            last: None,
            min_instant: T::infinity(),
            max_instant: T::neg_infinity(),
        }
    }

    pub fn record(&mut self, task: usize, regret: T) {
        self.per_task[task] += regret;
        self.per_task_pulls[task] += 1;
        self.cumulative += regret;
        self.pulls += 1;
        self.min_instant = self.min_instant.min(regret);
        self.max_instant = self.max_instant.max(regret);
        let point = TracePoint {
            t: self.pulls,
            task,
            cumulative: self.cumulative,
        };
        if self.stride > 0 && self.pulls.is_multiple_of(self.stride) {
            self.trace.push(point);
        }
        self.last = Some(point);
    }

    pub fn cumulative(&self) -> T {
        self.cumulative
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn task_regret(&self, task: usize) -> T {
        self.per_task[task]
    }

    pub fn per_task_regret(&self) -> &[T] {
        &self.per_task
    }

    pub fn per_task_pulls(&self) -> &[u64] {
        &self.per_task_pulls
    }

    pub fn stride(&self) -> u64 {
        self.stride
    }

    /// Stride-thinned trace, always closed by the final pull.
    pub fn trace(&self) -> Vec<TracePoint<T>> {
        let mut out = self.trace.clone();
        if let Some(last) = self.last {
            if out.last().map(|p| p.t) != Some(last.t) {
                out.push(last);
            }
        }
        out
    }

    /// Smallest and largest instantaneous regret recorded, if any.
    pub fn instant_range(&self) -> Option<(T, T)> {
        (self.pulls > 0).then_some((self.min_instant, self.max_instant))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::subspace_distance;
    use rand_chacha::ChaCha8Rng;

    fn spec(d: usize, k: usize, m: usize) -> InstanceSpec<f64> {
        InstanceSpec::new(d, k, m, 1000)
    }

    #[test]
    fn generated_instances_satisfy_invariants() {
        for (d, k, m, seed) in [(10, 2, 25, 1u64), (5, 5, 5, 2), (3, 1, 1, 3), (10, 4, 50, 4)] {
            let inst = BanditInstance::from_seed(&spec(d, k, m).with_seed(seed)).unwrap();
            inst.check_invariants().unwrap();
        }
    }

    #[test]
    fn full_rank_spans_everything() {
        let inst = BanditInstance::from_seed(&spec(4, 4, 6).with_seed(9)).unwrap();
        let id = OrthonormalBasis::standard(4, 4);
        assert!(subspace_distance(inst.basis(), &id).unwrap() < 1e-8);
    }

    #[test]
    fn seeds_are_reproducible_and_distinct() {
        let a = BanditInstance::from_seed(&spec(10, 2, 25).with_seed(1)).unwrap();
        let b = BanditInstance::from_seed(&spec(10, 2, 25).with_seed(1)).unwrap();
        let c = BanditInstance::from_seed(&spec(10, 2, 25).with_seed(2)).unwrap();
        assert_eq!(a.theta_matrix(), b.theta_matrix());
        assert!(a.theta_matrix().max_abs_diff(c.theta_matrix()) > 1e-3);
    }

    #[test]
    fn spec_violations_are_config_errors() {
        let mut r = ChaCha8Rng::seed_from_u64(0);
        for bad in [spec(3, 4, 5), spec(3, 0, 5), spec(10, 3, 2), InstanceSpec::new(3, 1, 1, 0)] {
            assert!(matches!(BanditInstance::generate(&bad, &mut r), Err(Error::Config { .. })));
        }
        let neg = spec(3, 1, 1).with_noise(-1.0);
        assert!(matches!(BanditInstance::generate(&neg, &mut r), Err(Error::Config { .. })));
    }

    #[test]
    fn pull_and_regret_examples() {
        let inst = BanditInstance::from_seed(&spec(6, 2, 3).with_seed(5).with_noise(0.0)).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let theta = inst.theta(1).to_vec();
        assert!((inst.pull(1, &theta, &mut r).unwrap() - 1.0).abs() < 1e-12);
        assert!(inst.instant_regret(1, &theta).unwrap().abs() < 1e-12);
        let neg: Vec<f64> = theta.iter().map(|x| -x).collect();
        assert!((inst.instant_regret(1, &neg).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(inst.instant_regret(1, &[0.0; 6]).unwrap(), 1.0);

        // An action orthogonal to θ: project e_1 off θ and normalize.
        let mut a = vec![0.0; 6];
        a[0] = 1.0;
        let c = dot(&a, &theta);
        crate::linalg::axpy(-c, &theta, &mut a);
        let n = norm(&a);
        a.iter_mut().for_each(|x| *x /= n);
        assert!(inst.pull(1, &a, &mut r).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pull_errors() {
        let inst = BanditInstance::from_seed(&spec(3, 1, 2).with_seed(5)).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            inst.pull(0, &[1.0, 1.0, 0.0], &mut r),
            Err(Error::InfeasibleAction { .. })
        ));
        assert!(matches!(inst.pull(2, &[1.0, 0.0, 0.0], &mut r), Err(Error::TaskIndex { .. })));
        assert!(matches!(
            inst.instant_regret(0, &[1.0 + 1e-6, 0.0, 0.0]),
            Err(Error::InfeasibleAction { .. })
        ));
        // Round-off slack is accepted.
        assert!(inst.pull(0, &[1.0 + 1e-10, 0.0, 0.0], &mut r).is_ok());
    }

    #[test]
    fn noisy_pull_mean_matches_expectation() {
        let inst = BanditInstance::from_seed(&spec(5, 2, 2).with_seed(8)).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let a = [0.6, 0.0, -0.8, 0.0, 0.0];
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| inst.pull(0, &a, &mut r).unwrap()).sum::<f64>() / n as f64;
        let expected = dot(&a, inst.theta(0));
        assert!((mean - expected).abs() <= 3.0 / (n as f64).sqrt() * 1.1);
    }

    #[test]
    fn ledger_trace_and_accounting() {
        let mut l = RegretLedger::<f64>::new(2, 3);
        for i in 0..7 {
            l.record(i % 2, 0.5);
        }
        assert_eq!(l.pulls(), 7);
        assert!((l.cumulative() - 3.5).abs() < 1e-15);
        assert_eq!(l.per_task_pulls(), &[4, 3]);
        let tr = l.trace();
        assert_eq!(tr.iter().map(|p| p.t).collect::<Vec<_>>(), vec![3, 6, 7]);
        assert!(tr.windows(2).all(|w| w[0].cumulative <= w[1].cumulative));
        assert_eq!(l.instant_range(), Some((0.5, 0.5)));
        assert_eq!(RegretLedger::<f64>::new(1, 10).trace(), vec![]);
    }
}
