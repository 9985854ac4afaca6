//! Analytic derivatives against central finite differences.

mod common;

use ij_unlearn::data::{Dataset, Sample};
use ij_unlearn::objectives::{
    self, loss_grad, loss_hessian, loss_value, LossKind, ObjectiveSpec, RegKind,
};
use proptest::prelude::*;

const STEP: f64 = 1e-5;

fn fd_grad(f: impl Fn(&[f64]) -> f64, theta: &[f64]) -> Vec<f64> {
    (0..theta.len())
        .map(|j| {
            let mut hi = theta.to_vec();
            let mut lo = theta.to_vec();
            hi[j] += STEP;
            lo[j] -= STEP;
            (f(&hi) - f(&lo)) / (2.0 * STEP)
        })
        .collect()
}

fn fd_jacobian(g: impl Fn(&[f64]) -> Vec<f64>, theta: &[f64]) -> Vec<Vec<f64>> {
    let d = theta.len();
    let mut out = vec![vec![0.0; d]; d];
    for j in 0..d {
        let mut hi = theta.to_vec();
        let mut lo = theta.to_vec();
        hi[j] += STEP;
        lo[j] -= STEP;
        let (gh, gl) = (g(&hi), g(&lo));
        for i in 0..d {
            out[i][j] = (gh[i] - gl[i]) / (2.0 * STEP);
        }
    }
    out
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn spec(loss: LossKind) -> ObjectiveSpec {
    ObjectiveSpec::new(loss, RegKind::L2, 0.0).unwrap()
}

fn sample_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, bool)> {
    (1usize..6).prop_flat_map(|d| {
        (
            prop::collection::vec(-2.0..2.0f64, d),
            prop::collection::vec(-2.0..2.0f64, d),
            any::<bool>(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn logistic_gradient_matches_differences((x, theta, pos) in sample_strategy()) {
        let s = spec(LossKind::Logistic);
        let z = Sample { x: &x, y: if pos { 1.0 } else { -1.0 } };
        let g = loss_grad(&s, z, &theta).unwrap();
        let fd = fd_grad(|t| loss_value(&s, z, t).unwrap(), &theta);
        prop_assert!(max_gap(&g, &fd) <= 1e-6);
    }

    #[test]
    fn squared_gradient_matches_differences((x, theta, _pos) in sample_strategy(), y in -3.0..3.0f64) {
        let s = spec(LossKind::SquaredError);
        let z = Sample { x: &x, y };
        let g = loss_grad(&s, z, &theta).unwrap();
        let fd = fd_grad(|t| loss_value(&s, z, t).unwrap(), &theta);
        prop_assert!(max_gap(&g, &fd) <= 1e-6);
    }

    #[test]
    fn loss_hessians_match_gradient_differences((x, theta, pos) in sample_strategy(), squared in any::<bool>()) {
        let loss = if squared { LossKind::SquaredError } else { LossKind::Logistic };
        let s = spec(loss);
        let z = Sample { x: &x, y: if pos { 1.0 } else { -1.0 } };
        let h = loss_hessian(&s, z, &theta).unwrap().to_rows();
        let fd = fd_jacobian(|t| loss_grad(&s, z, t).unwrap().into_inner(), &theta);
        for (a, b) in h.iter().zip(&fd) {
            prop_assert!(max_gap(a, b) <= 1e-5);
        }
    }

    #[test]
    fn logistic_hessian_is_psd((x, theta, pos) in sample_strategy(), seed in any::<u64>()) {
        let s = spec(LossKind::Logistic);
        let z = Sample { x: &x, y: if pos { 1.0 } else { -1.0 } };
        let h = loss_hessian(&s, z, &theta).unwrap();
        let mut r = common::rng(seed);
        let v = common::normal_vec(&mut r, x.len());
        prop_assert!(h.quad_form(&v) >= 0.0);
    }

    #[test]
    fn objective_derivatives_match_differences(seed in 0u64..1000, lambda in 0.0..2.0f64, squared in any::<bool>()) {
        let ds: Dataset = if squared { common::regression_data(15, 3, seed) } else { common::logistic_data(15, 3, seed) };
        let loss = if squared { LossKind::SquaredError } else { LossKind::Logistic };
        let s = ObjectiveSpec::new(loss, RegKind::L2, lambda).unwrap();
        let rows = objectives::all_rows(&ds);
        let mut r = common::rng(seed ^ 0xABCD);
        let theta = common::normal_vec(&mut r, 3);
        let g = objectives::objective_grad(&s, &ds, &rows, &theta).unwrap();
        let fd = fd_grad(|t| objectives::objective_value(&s, &ds, &rows, t), &theta);
        prop_assert!(max_gap(&g, &fd) <= 1e-6);
        let h = objectives::objective_hessian(&s, &ds, &rows, &theta).unwrap().to_rows();
        let fdh = fd_jacobian(|t| objectives::objective_grad(&s, &ds, &rows, t).unwrap().into_inner(), &theta);
        for (a, b) in h.iter().zip(&fdh) {
            prop_assert!(max_gap(a, b) <= 1e-5);
        }
    }
}

#[test]
fn squared_loss_example() {
    let s = spec(LossKind::SquaredError);
    let z = Sample { x: &[1.0], y: 3.0 };
    assert_eq!(loss_value(&s, z, &[1.0]).unwrap(), 2.0);
    assert_eq!(loss_grad(&s, z, &[1.0]).unwrap().as_slice(), &[-2.0]);
}

#[test]
fn elastic_net_has_no_gradient() {
    let s = ObjectiveSpec::new(LossKind::Logistic, RegKind::ElasticNet { mix: 0.5 }, 0.1).unwrap();
    assert!(objectives::reg_grad_smooth(&s, &[1.0, 2.0]).is_err());
    assert!(objectives::reg_hessian_smooth(&s, &[1.0, 2.0]).is_err());
}
