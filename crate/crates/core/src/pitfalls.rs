//! A one-dimensional dataset on which leave-one-out cross-validation picks a
//! different regularization strength before and after a single deletion.
//!
//! Loss `0.5 (z - theta)^2`, penalty `theta^2`, grid `{0, big_lambda}`.
//! `n - 1` points sit at `-1/n` and one at `n`. With all points present the
//! held-out errors favour `big_lambda`, so the released model is about zero
//! and any removal update started there stays about zero. Once the outlier
//! is gone cross-validation prefers `lambda = 0` and retraining gives `-1/n`.
//! The two disagree by `1/n`, far more than the noise a removal mechanism
//! adds.
//!
//! The selection and the update use the closed forms
//! `theta_hat(lambda) = mean / (1 + lambda)` and inverse Hessian
//! `1 / (1 + lambda)`, which correspond to a `0.5 theta^2` penalty. The
//! refits run by the library use the `theta^2` penalty; both pick the same
//! grid value.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::objectives::{LossKind, ObjectiveSpec, RegKind, SmoothnessConstants};
use crate::trainer::{cv_select, fit_rows, DEFAULT_TOL, LAMBDA_INFINITY};
use crate::unlearner::{noise_scale, Branch};

/// Smallest `big_lambda` accepted as a stand-in for an infinite penalty.
pub const MIN_BIG_LAMBDA: f64 = 1e10;

/// Privacy parameter used for the noise comparison: `delta = 1e-5` and
/// `epsilon = sqrt(2 ln(1.25 / delta))`, so the Gaussian multiplier is one.
pub const NOISE_DELTA: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub n: usize,
    pub big_lambda: f64,
    /// Held-out errors `(lambda, error)` on the full dataset.
    pub cv_before: Vec<(f64, f64)>,
    /// Held-out errors `(lambda, error)` after the outlier is removed.
    pub cv_after: Vec<(f64, f64)>,
    pub lambda_before: f64,
    pub lambda_after: f64,
    /// Grid values picked by the library's own refitting cross-validation,
    /// before and (for `n >= 3`) after the deletion.
    pub refit_lambda_before: f64,
    pub refit_lambda_after: Option<f64>,
    /// Output of the removal update from the model selected before deletion.
    pub theta_tilde: f64,
    /// Minimizer after deletion at the re-selected `lambda`.
    pub theta_retrained: f64,
    pub gap: f64,
    pub gap_times_n: f64,
    /// `n / big_lambda`, the error from standing in for an infinite penalty.
    pub truncation_bound: f64,
    /// Noise a smooth removal mechanism adds for one deletion, with unit
    /// smoothness constants.
    pub noise_scale: f64,
    /// Whether `noise_scale` stays below a tenth of the gap.
    pub noise_below_gap: bool,
    /// Whether the selection flips and the gap is `1/n` up to truncation.
    pub unlearning_fails: bool,
}

/// Builds the dataset (`n - 1` values at `-1/n`, the last at `n`), reruns
/// the selection after deleting the last point and measures the gap.
pub fn run_counterexample(n: usize, big_lambda: f64) -> Result<CounterexampleReport> {
    if n < 2 {
        return Err(Error::BadN(n));
    }
    if !(big_lambda >= MIN_BIG_LAMBDA) || !big_lambda.is_finite() {
        return Err(Error::Config(format!("big_lambda must be at least {MIN_BIG_LAMBDA:e}, got {big_lambda}")));
    }
    let nf = n as f64;
    let a = -1.0 / nf;
    let b = nf;
    let grid = [0.0, big_lambda];

    let cv_before: Vec<(f64, f64)> = grid.iter().map(|&l| (l, cv_full(nf, l))).collect();
    let cv_after: Vec<(f64, f64)> = grid.iter().map(|&l| (l, cv_without_outlier(nf, l))).collect();
    let lambda_before = argmin(&cv_before);
    let lambda_after = argmin(&cv_after);

    let mut values = vec![a; n - 1];
    values.push(b);
    let ds = Dataset::regression(values.iter().map(|_| vec![1.0]).collect(), values.clone())?;
    let template = ObjectiveSpec::new(LossKind::SquaredError, RegKind::L2, 0.0)?;
    let refit_lambda_before = cv_select(&ds, &template, &grid, DEFAULT_TOL)?.selected;
    let kept: Vec<usize> = (0..n - 1).collect();
    let refit_lambda_after = if n >= 3 {
        Some(cv_select(&ds.subset(&kept), &template, &grid, DEFAULT_TOL)?.selected)
    } else {
        None
    };

    let theta_hat = mean(&values) / (1.0 + lambda_before);
    let theta_tilde = theta_hat + (1.0 / nf) * (1.0 / (1.0 + lambda_before)) * (theta_hat - b);
    let retrained = fit_rows(&ds, &kept, &template.with_lambda(lambda_after)?, DEFAULT_TOL, None)?;
    let theta_retrained = retrained.theta[0];

    let gap = (theta_tilde - theta_retrained).abs();
    let truncation_bound = nf / big_lambda;
    let epsilon = (2.0 * (1.25 / NOISE_DELTA).ln()).sqrt();
    let noise = noise_scale(Branch::Smooth, 1, n, &SmoothnessConstants::unit(), epsilon, NOISE_DELTA)?;

    let flipped = lambda_before == big_lambda && lambda_after == 0.0;
    Ok(CounterexampleReport {
        n,
        big_lambda,
        cv_before,
        cv_after,
        lambda_before,
        lambda_after,
        refit_lambda_before,
        refit_lambda_after,
        theta_tilde,
        theta_retrained,
        gap,
        gap_times_n: gap * nf,
        truncation_bound,
        noise_scale: noise,
        noise_below_gap: noise < gap / 10.0,
        unlearning_fails: flipped && (gap * nf - 1.0).abs() <= 1e-6_f64.max(truncation_bound),
    })
}

/// [`run_counterexample`] with `big_lambda = 1e12`.
pub fn run_counterexample_default(n: usize) -> Result<CounterexampleReport> {
    run_counterexample(n, LAMBDA_INFINITY)
}

/// Held-out error with every point present, as a function of `lambda`:
/// `(n-1)/(2n) (s mean_{-A} - 1/n)^2 + 1/(2n) (n + s/n)^2`, `s = 1/(1+lambda)`.
fn cv_full(n: f64, lambda: f64) -> f64 {
    let s = 1.0 / (1.0 + lambda);
    let mean_without_a = (n - (n - 2.0) / n) / (n - 1.0);
    (n - 1.0) / (2.0 * n) * (s * mean_without_a - 1.0 / n).powi(2) + 1.0 / (2.0 * n) * (n + s / n).powi(2)
}

/// Held-out error once the outlier is gone: `1/(2n) (-1/n + s/n)^2`.
fn cv_without_outlier(n: f64, lambda: f64) -> f64 {
    let s = 1.0 / (1.0 + lambda);
    1.0 / (2.0 * n) * (-1.0 / n + s / n).powi(2)
}

/// Grid value with the smallest error; ties go to the larger value.
fn argmin(cv: &[(f64, f64)]) -> f64 {
    let mut best = cv[0];
    for &(l, e) in &cv[1..] {
        if e < best.1 || (e == best.1 && l > best.0) {
            best = (l, e);
        }
    }
    best.0
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_of_ten() {
        let r = run_counterexample(10, 1e12).unwrap();
        assert_eq!(r.lambda_before, 1e12);
        assert_eq!(r.lambda_after, 0.0);
        assert!(r.theta_tilde.abs() < 1e-10);
        assert!((r.theta_retrained + 0.1).abs() < 1e-12);
        assert!((r.gap - 0.1).abs() < 1e-9);
        assert!(r.unlearning_fails);
    }

    #[test]
    fn n_of_two() {
        let r = run_counterexample(2, 1e12).unwrap();
        assert_eq!(r.lambda_before, 1e12);
        assert_eq!(r.refit_lambda_after, None);
        assert!((r.gap - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_tiny_n_and_lambda() {
        assert!(matches!(run_counterexample(1, 1e12), Err(Error::BadN(1))));
        assert!(run_counterexample(5, 1e3).is_err());
    }

    #[test]
    fn refit_selection_agrees() {
        let r = run_counterexample(50, 1e12).unwrap();
        assert_eq!(r.refit_lambda_before, r.lambda_before);
        assert_eq!(r.refit_lambda_after, Some(r.lambda_after));
    }
}
