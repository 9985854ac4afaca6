mod common;

use ij_unlearn::data::Dataset;
use ij_unlearn::numkit::{factorize, gaussian_sample, SymMatrix};
use ij_unlearn::objectives::{self, estimate_constants, LossKind, ObjectiveSpec, RegKind};
use ij_unlearn::prox::{prox_diagonal, prox_solve, soft_threshold, ProxProblem};
use ij_unlearn::trainer::{self, train};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cholesky_reconstructs(seed in any::<u64>(), d in 1usize..60) {
        let h = common::random_spd(&mut common::rng(seed), d);
        let f = factorize(&h).unwrap();
        let mut diff = f.reconstruct();
        diff.add_scaled(-1.0, &h);
        prop_assert!(diff.frobenius_norm() <= 1e-10 * h.frobenius_norm());
    }

    #[test]
    fn solve_residual_is_small(seed in any::<u64>(), d in 1usize..120) {
        let mut r = common::rng(seed);
        let h = common::random_spd(&mut r, d);
        let b = common::normal_vec(&mut r, d);
        let x = factorize(&h).unwrap().solve(&b).unwrap();
        let hx = h.matvec(&x);
        prop_assert!(common::dist(&hx, &b) <= 1e-8 * (1.0 + common::norm(&b)));
    }

    #[test]
    fn gaussian_draws_depend_on_seed(a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(a != b);
        prop_assert_ne!(gaussian_sample(1.0, 4, a), gaussian_sample(1.0, 4, b));
        prop_assert!(gaussian_sample(0.0, 4, a).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn mu_is_monotone_in_lambda_and_permutation_invariant(seed in 0u64..500, l1 in 0.0..1.0f64, l2 in 0.0..1.0f64) {
        let ds = common::logistic_data(30, 3, seed);
        let theta = [0.1, -0.2, 0.3];
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let at = |lambda| {
            let spec = ObjectiveSpec::new(LossKind::Logistic, RegKind::L2, lambda).unwrap();
            estimate_constants(&ds, &spec, &theta).unwrap()
        };
        prop_assert!(at(lo).mu <= at(hi).mu);

        let mut order: Vec<usize> = (0..ds.n()).collect();
        order.reverse();
        let rows: Vec<Vec<f64>> = order.iter().map(|&i| ds.row(i).to_vec()).collect();
        let labels: Vec<f64> = order.iter().map(|&i| ds.target(i)).collect();
        let permuted = Dataset::classification(rows, labels).unwrap();
        let spec = ObjectiveSpec::new(LossKind::Logistic, RegKind::L2, hi).unwrap();
        prop_assert_eq!(estimate_constants(&permuted, &spec, &theta).unwrap(), at(hi));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn training_is_deterministic_and_locally_optimal(seed in 0u64..1000, lambda in 0.01..0.5f64, l1 in any::<bool>()) {
        let ds = common::logistic_data(60, 4, seed);
        let reg = if l1 { RegKind::L1 } else { RegKind::L2 };
        let spec = ObjectiveSpec::new(LossKind::Logistic, reg, lambda).unwrap();
        let a = train(&ds, &spec, 1e-10).unwrap();
        let b = train(&ds, &spec, 1e-10).unwrap();
        prop_assert_eq!(&a, &b);

        let rows = objectives::all_rows(&ds);
        let best = objectives::objective_value(&spec, &ds, &rows, &a.theta);
        let mut r = common::rng(seed);
        for _ in 0..50 {
            let dir = common::normal_vec(&mut r, 4);
            let scale = 0.1 / common::norm(&dir);
            let moved: Vec<f64> = a.theta.iter().zip(&dir).map(|(t, v)| t + scale * v).collect();
            prop_assert!(best <= objectives::objective_value(&spec, &ds, &rows, &moved));
        }
    }

    #[test]
    fn solutions_at_two_tolerances_agree(seed in 0u64..1000, lambda in 0.01..0.5f64) {
        let ds = common::logistic_data(60, 4, seed);
        let spec = ObjectiveSpec::new(LossKind::Logistic, RegKind::L2, lambda).unwrap();
        let (t1, t2) = (1e-4, 1e-10);
        let a = train(&ds, &spec, t1).unwrap();
        let b = train(&ds, &spec, t2).unwrap();
        let mu = 2.0 * lambda;
        prop_assert!(common::dist(&a.theta, &b.theta) <= (t1 + t2) / mu);
    }

    #[test]
    fn leave_out_shift_is_bounded(seed in 0u64..1000, m in 1usize..10) {
        let ds = common::logistic_data(200, 5, seed);
        let spec = ObjectiveSpec::new(LossKind::Logistic, RegKind::L2, 0.05).unwrap();
        let full = train(&ds, &spec, 1e-12).unwrap();
        let k = estimate_constants(&ds, &spec, &full.theta).unwrap();
        let removed = (0..m).collect();
        let loo = trainer::train_leave_out(&ds, &spec, &removed, 1e-12).unwrap();
        let bound = ij_unlearn::unlearner::leave_out_shift_bound(m, ds.n(), &k);
        prop_assert!(common::dist(&full.theta, &loo.theta) <= bound);
    }
}

/// `0.5 (v - t)^T H (v - t) + lambda pi(t)`, evaluated independently of the
/// library.
fn prox_objective(h: &[Vec<f64>], v: &[f64], lambda: f64, mix: f64, t: &[f64]) -> f64 {
    let d = v.len();
    let diff: Vec<f64> = (0..d).map(|i| v[i] - t[i]).collect();
    let mut q = 0.0;
    for i in 0..d {
        for j in 0..d {
            q += diff[i] * h[i][j] * diff[j];
        }
    }
    let l1: f64 = t.iter().map(|x| x.abs()).sum();
    let l2: f64 = t.iter().map(|x| x * x).sum();
    0.5 * q + lambda * (mix * l1 + (1.0 - mix) * l2)
}

/// Grid search over `[-4, 4]^d`: step 1e-2, then 1e-3 and 1e-4 around the
/// incumbent.
fn grid_oracle(f: impl Fn(&[f64]) -> f64, d: usize) -> Vec<f64> {
    let mut best = vec![0.0; d];
    let stages = [(-4.0, 1e-2, 800), (-0.03, 1e-3, 60), (-0.003, 1e-4, 60)];
    for (start, step, count) in stages {
        let center = best.clone();
        let mut best_val = f(&best);
        let second = if d == 2 { count } else { 0 };
        for i in 0..=count {
            for j in 0..=second {
                let mut t = center.clone();
                t[0] += start + i as f64 * step;
                if d == 2 {
                    t[1] += start + j as f64 * step;
                }
                let val = f(&t);
                if val < best_val {
                    best_val = val;
                    best = t;
                }
            }
        }
    }
    best
}

#[test]
fn prox_matches_grid_search() {
    let mut r = common::rng(11);
    for k in 0..50 {
        let d = 1 + k % 2;
        let h = common::random_spd(&mut r, d);
        let v: Vec<f64> = common::normal_vec(&mut r, d).iter().map(|x| x.clamp(-2.5, 2.5)).collect();
        let lambda = 0.1 + (k as f64) / 40.0;
        let mix = if k % 3 == 0 { 0.5 } else { 1.0 };
        let reg = if mix == 1.0 { RegKind::L1 } else { RegKind::ElasticNet { mix } };
        let f = factorize(&h).unwrap();
        let out = prox_solve(&ProxProblem::new(&v, &f, lambda, reg)).unwrap();
        let rows = h.to_rows();
        let oracle = grid_oracle(|t| prox_objective(&rows, &v, lambda, mix, t), d);
        let gap = out.max_abs_diff(&oracle);
        assert!(gap <= 1e-3, "problem {k}: gap {gap}, prox {out:?}, grid {oracle:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagonal_metric_is_soft_thresholding(
        diag in prop::collection::vec(0.1..5.0f64, 1..8),
        seed in any::<u64>(),
        lambda in 0.01..3.0f64,
    ) {
        let d = diag.len();
        let v: Vec<f64> = common::normal_vec(&mut common::rng(seed), d).iter().map(|x| 2.0 * x).collect();
        let f = factorize(&SymMatrix::diagonal(&diag)).unwrap();
        let out = prox_solve(&ProxProblem::new(&v, &f, lambda, RegKind::L1).with_tol(1e-13)).unwrap();
        for j in 0..d {
            let expect = soft_threshold(v[j], lambda / diag[j]);
            prop_assert!((out[j] - expect).abs() <= 1e-10);
        }
        let closed = prox_diagonal(&v, &diag, lambda, RegKind::L1);
        prop_assert!(out.max_abs_diff(&closed) <= 1e-10);
    }

    #[test]
    fn prox_is_nonexpansive_in_the_metric(seed in any::<u64>(), d in 1usize..6, lambda in 0.01..2.0f64) {
        let mut r = common::rng(seed);
        let h = common::random_spd(&mut r, d);
        let f = factorize(&h).unwrap();
        let v1 = common::normal_vec(&mut r, d);
        let v2 = common::normal_vec(&mut r, d);
        let p1 = prox_solve(&ProxProblem::new(&v1, &f, lambda, RegKind::L1)).unwrap();
        let p2 = prox_solve(&ProxProblem::new(&v2, &f, lambda, RegKind::L1)).unwrap();
        let dp = p1.sub(&p2);
        let dv: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| a - b).collect();
        prop_assert!(h.quad_form(&dp).sqrt() <= h.quad_form(&dv).sqrt() + 1e-8);
    }

    #[test]
    fn subgradient_shift_recovers_the_point(seed in any::<u64>(), d in 1usize..6, lambda in 0.01..2.0f64) {
        // p = prox(v) iff H (v - p) lies in lambda * subdifferential(|.|_1)(p)
        let mut r = common::rng(seed);
        let h = common::random_spd(&mut r, d);
        let f = factorize(&h).unwrap();
        let raw = common::normal_vec(&mut r, d);
        let p: Vec<f64> = raw.iter().map(|x| if x.abs() < 0.5 { 0.0 } else { *x }).collect();
        let s: Vec<f64> = p
            .iter()
            .zip(common::normal_vec(&mut r, d))
            .map(|(pj, u)| if *pj != 0.0 { pj.signum() } else { u.tanh() * 0.9 })
            .collect();
        let shift = f.solve(&s).unwrap().scaled(lambda);
        let v: Vec<f64> = p.iter().zip(shift.iter()).map(|(a, b)| a + b).collect();
        let out = prox_solve(&ProxProblem::new(&v, &f, lambda, RegKind::L1).with_tol(1e-13)).unwrap();
        prop_assert!(out.max_abs_diff(&p) <= 1e-8, "{:?} vs {:?}", out, p);
        let again = prox_solve(&ProxProblem::new(&out, &f, lambda, RegKind::L1).with_tol(1e-13));
        prop_assert!(again.is_ok());
    }
}

#[test]
fn ridge_minimizer_example() {
    // mean 2, lambda 1: argmin 0.5 mean (z - t)^2 + t^2 = 2 / 3
    let ds = Dataset::regression(vec![vec![1.0]; 3], vec![1.0, 2.0, 3.0]).unwrap();
    let spec = ObjectiveSpec::new(LossKind::SquaredError, RegKind::L2, 1.0).unwrap();
    let m = train(&ds, &spec, 1e-12).unwrap();
    assert!((m.theta[0] - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn large_l1_penalty_zeroes_the_model() {
    let ds = common::logistic_data(80, 4, 3);
    let rows = objectives::all_rows(&ds);
    let spec0 = ObjectiveSpec::new(LossKind::Logistic, RegKind::L2, 0.0).unwrap();
    let g0 = objectives::mean_loss_grad(&spec0, &ds, &rows, &[0.0; 4]);
    let threshold = g0.norm_inf();
    let spec = ObjectiveSpec::new(LossKind::Logistic, RegKind::L1, threshold * 1.01).unwrap();
    let m = train(&ds, &spec, 1e-10).unwrap();
    assert!(m.theta.iter().all(|t| *t == 0.0), "{:?}", m.theta);
}
