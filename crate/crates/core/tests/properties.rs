use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use repbandit::env::{BanditInstance, InstanceSpec};
use repbandit::linalg::{
    argmax_unit_ball, dot, norm, orthonormality_deviation, random_orthogonal, sample_unit_sphere, subspace_distance,
    top_k_left_singular_vectors, Matrix,
};
use repbandit::lll::{run_lll, LllConfig};
use repbandit::mtrl::{run_mtrl, MtrlConfig};
use repbandit::Real;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..9).prop_flat_map(|d| (Just(d), 1..=d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn subspace_distance_is_rotation_invariant((d, k) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Matrix::from_fn(d, k + 2, |_, _| f64::standard_normal(&mut rng));
        let b_hat = top_k_left_singular_vectors(&a, k).unwrap();
        let b = InstanceSpec::<f64>::new(d, k, k, 1).with_seed(seed);
        let truth = BanditInstance::from_seed(&b).unwrap();
        let base = subspace_distance(&b_hat, truth.basis()).unwrap();
        let r = random_orthogonal::<f64, _>(k, &mut rng).unwrap();
        let rotated = b_hat.rotated(&r).unwrap();
        prop_assert!(orthonormality_deviation(rotated.matrix()) < 1e-8);
        prop_assert!((subspace_distance(&rotated, truth.basis()).unwrap() - base).abs() < 1e-8);
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn argmax_is_scale_invariant(v in prop::collection::vec(-10.0f64..10.0, 1..8), c in 0.01f64..100.0) {
        prop_assume!(norm(&v) > 1e-6);
        let a = argmax_unit_ball(&v);
        let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
        let b = argmax_unit_ball(&scaled);
        prop_assert!((norm(&a) - 1.0).abs() < 1e-12);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((dot(&a, &v) - norm(&v)).abs() < 1e-9 * norm(&v).max(1.0));
    }

    #[test]
    fn sphere_samples_are_unit((d, _) in dims(), seed in any::<u64>()) {
        let x: Vec<f64> = sample_unit_sphere(d, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!((norm(&x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generated_instances_hold_invariants((d, k) in dims(), extra in 0usize..5, seed in any::<u64>()) {
        let inst = BanditInstance::<f64>::from_seed(&InstanceSpec::new(d, k, k + extra, 5).with_seed(seed)).unwrap();
        prop_assert!(inst.check_invariants().is_ok());
        for m in 0..inst.tasks() {
            prop_assert!((norm(inst.theta(m)) - 1.0).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mtrl_ledger_accounts_every_pull(seed in any::<u64>(), m in 2usize..6) {
        let inst = BanditInstance::<f64>::from_seed(&InstanceSpec::new(4, 2, m, 400).with_seed(seed)).unwrap();
        let (ledger, diag) = run_mtrl(&inst, &MtrlConfig { trace_stride: 7, ..MtrlConfig::default() },
            &mut ChaCha8Rng::seed_from_u64(seed ^ 1)).unwrap();
        prop_assert_eq!(ledger.pulls(), m as u64 * 400);
        prop_assert!(ledger.per_task_pulls().iter().all(|&p| p == 400));
        let (lo, hi) = ledger.instant_range().unwrap();
        prop_assert!(lo >= 0.0 && hi <= 2.0);
        let trace = ledger.trace();
        prop_assert!(trace.windows(2).all(|w| w[0].cumulative <= w[1].cumulative && w[0].t < w[1].t));
        prop_assert_eq!(trace.last().unwrap().t, m as u64 * 400);
        prop_assert!(orthonormality_deviation(diag.b_hat.matrix()) < 1e-8);
    }

    #[test]
    fn lll_basis_stays_orthonormal(seed in any::<u64>(), eps in 0.15f64..0.6) {
        let inst = BanditInstance::<f64>::from_seed(&InstanceSpec::new(6, 2, 8, 10).with_seed(seed)).unwrap();
        let out = run_lll(&inst, &LllConfig::pure_exploration(eps, 0.1), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(orthonormality_deviation(out.state.basis.matrix()) < 1e-8);
        prop_assert_eq!(out.state.nu.len(), out.state.tau());
        prop_assert!(out.state.tau() <= 6);
        prop_assert!(out.state.tau_history.windows(2).all(|w| w[0] <= w[1]));
    }
}
