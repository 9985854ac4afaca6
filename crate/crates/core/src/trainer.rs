//! Empirical risk minimizers for the full and leave-out objectives, and
//! leave-one-out cross-validation over a grid of regularization strengths.
//!
//! Smooth objectives are minimized by damped Newton with backtracking.
//! Non-smooth ones use proximal Newton: each step minimizes the local
//! quadratic model of the loss plus the exact regularizer (by coordinate
//! descent), followed by a backtracking search on the true objective.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, SampleId};
use crate::error::{Error, Result};
use crate::numkit::{factorize, Vector};
use crate::objectives::{self, ObjectiveSpec};
use crate::prox::{self, QuadraticProblem};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Stand-in for `lambda = infinity` in grids.
pub const LAMBDA_INFINITY: f64 = 1e12;

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;
/// Relative predicted decrease below which line searches are skipped.
const FLAT_DECREMENT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub theta: Vector,
    pub lambda: f64,
    /// Number of rows the model was fitted on.
    pub n: usize,
    /// Gradient norm (smooth) or proximal-gradient residual (non-smooth) at
    /// the returned point.
    pub gradient_norm_at_solution: f64,
    pub tol: f64,
    pub iterations: usize,
    pub spec: ObjectiveSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub lambdas: Vec<f64>,
    pub errors: Vec<f64>,
    pub selected: f64,
    pub tie_break: TieBreak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    LargestLambda,
}

/// Minimizes the regularized empirical risk over all rows of `ds`.
pub fn train(ds: &Dataset, spec: &ObjectiveSpec, tol: f64) -> Result<ModelState> {
    fit_rows(ds, &objectives::all_rows(ds), spec, tol, None)
}

/// Minimizes the objective with the rows named in `excluded` removed,
/// starting from zero. This is the retraining baseline.
pub fn train_leave_out(
    ds: &Dataset,
    spec: &ObjectiveSpec,
    excluded: &BTreeSet<SampleId>,
    tol: f64,
) -> Result<ModelState> {
    let rows = remaining_rows(ds, excluded)?;
    fit_rows(ds, &rows, spec, tol, None)
}

/// Row indices of `ds` not named in `excluded`.
pub fn remaining_rows(ds: &Dataset, excluded: &BTreeSet<SampleId>) -> Result<Vec<usize>> {
    for &id in excluded {
        ds.row_of(id)?;
    }
    let rows: Vec<usize> = (0..ds.n()).filter(|&i| !excluded.contains(&ds.id(i))).collect();
    if rows.is_empty() {
        return Err(Error::AllDataDeleted);
    }
    Ok(rows)
}

/// Exact leave-one-out cross-validation (one refit per row and grid value),
/// choosing the grid value with the smallest mean held-out loss. Ties go to
/// the larger `lambda`.
pub fn cv_select(ds: &Dataset, template: &ObjectiveSpec, grid: &[f64], tol: f64) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(Error::Config("lambda grid is empty".into()));
    }
    let mut errors = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let spec = template.with_lambda(lambda)?;
        errors.push(cv_error(ds, &spec, tol)?);
    }
    let mut best = 0;
    for k in 1..grid.len() {
        let tie = (errors[k] - errors[best]).abs() <= 1e-12 * errors[best].abs().max(f64::MIN_POSITIVE);
        if (!tie && errors[k] < errors[best]) || (tie && grid[k] > grid[best]) {
            best = k;
        }
    }
    Ok(CvResult {
        lambdas: grid.to_vec(),
        errors,
        selected: grid[best],
        tie_break: TieBreak::LargestLambda,
    })
}

/// `(1/n) sum_i l(z_i, theta_{-i})`.
pub fn cv_error(ds: &Dataset, spec: &ObjectiveSpec, tol: f64) -> Result<f64> {
    let full = train(ds, spec, tol)?;
    let n = ds.n();
    let losses: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
            let held_out = fit_rows(ds, &rows, spec, tol, Some(&full.theta))?;
            objectives::loss_value(spec, ds.sample(i), &held_out.theta)
        })
        .collect::<Result<_>>()?;
    Ok(losses.iter().sum::<f64>() / n as f64)
}

/// Minimizes the objective restricted to `rows`, from `start` (or zero).
pub fn fit_rows(
    ds: &Dataset,
    rows: &[usize],
    spec: &ObjectiveSpec,
    tol: f64,
    start: Option<&[f64]>,
) -> Result<ModelState> {
    fit_rows_with(ds, rows, spec, tol, DEFAULT_MAX_ITERS, start)
}

pub fn fit_rows_with(
    ds: &Dataset,
    rows: &[usize],
    spec: &ObjectiveSpec,
    tol: f64,
    max_iters: usize,
    start: Option<&[f64]>,
) -> Result<ModelState> {
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    spec.validate()?;
    for &i in rows {
        spec.loss.check_label(ds.target(i))?;
    }
    let theta = match start {
        Some(s) if s.len() != ds.d() => {
            return Err(Error::DimensionMismatch { expected: ds.d(), found: s.len() })
        }
        Some(s) => Vector::from(s),
        None => Vector::zeros(ds.d()),
    };
    let (theta, residual, iterations) = if spec.is_smooth() {
        newton(ds, rows, spec, tol, max_iters, theta)?
    } else {
        proximal_newton(ds, rows, spec, tol, max_iters, theta)?
    };
    Ok(ModelState {
        theta,
        lambda: spec.lambda,
        n: rows.len(),
        gradient_norm_at_solution: residual,
        tol,
        iterations,
        spec: spec.clone(),
    })
}

fn newton(
    ds: &Dataset,
    rows: &[usize],
    spec: &ObjectiveSpec,
    tol: f64,
    max_iters: usize,
    mut theta: Vector,
) -> Result<(Vector, f64, usize)> {
    let mut residual = f64::INFINITY;
    for iter in 0..max_iters {
        let g = objectives::smooth_grad(spec, ds, rows, &theta);
        residual = g.norm();
        if !residual.is_finite() {
            return Err(Error::NonFinite("newton gradient"));
        }
        if residual <= tol {
            return Ok((theta, residual, iter));
        }
        let h = objectives::smooth_hessian(spec, ds, rows, &theta);
        let step = factorize(&h)?.solve(&g)?.scaled(-1.0);
        let slope = g.dot(&step);
        let f0 = objectives::objective_value(spec, ds, rows, &theta);
        if -slope <= FLAT_DECREMENT * (1.0 + f0.abs()) {
            // the predicted decrease is near rounding level, so the Armijo
            // test can no longer tell good steps from bad; this close to the
            // minimizer the full step converges quadratically
            theta.axpy(1.0, &step);
            continue;
        }
        let mut t = 1.0;
        loop {
            let trial = theta.add(&step.scaled(t));
            if objectives::objective_value(spec, ds, rows, &trial) <= f0 + ARMIJO * t * slope {
                theta = trial;
                break;
            }
            t *= 0.5;
            if t < MIN_STEP {
                theta = trial;
                break;
            }
        }
    }
    Err(Error::DidNotConverge { max_iters, residual })
}

/// `||theta - prox_{lambda pi}(theta - grad)||_2` with the identity metric.
pub(crate) fn prox_gradient_residual(spec: &ObjectiveSpec, theta: &[f64], grad: &[f64]) -> f64 {
    let shifted: Vec<f64> = theta.iter().zip(grad).map(|(t, g)| t - g).collect();
    let ones = vec![1.0; theta.len()];
    prox::prox_diagonal(&shifted, &ones, spec.lambda, spec.reg).distance(theta)
}

fn proximal_newton(
    ds: &Dataset,
    rows: &[usize],
    spec: &ObjectiveSpec,
    tol: f64,
    max_iters: usize,
    mut theta: Vector,
) -> Result<(Vector, f64, usize)> {
    let l1 = spec.lambda * spec.reg.l1_weight();
    let l2 = spec.lambda * spec.reg.l2_weight();
    let penalty = |t: &[f64]| spec.lambda * spec.reg.value(t);
    let mut residual = f64::INFINITY;
    for iter in 0..max_iters {
        let g = objectives::mean_loss_grad(spec, ds, rows, &theta);
        residual = prox_gradient_residual(spec, &theta, &g);
        if !residual.is_finite() {
            return Err(Error::NonFinite("proximal newton residual"));
        }
        if residual <= tol {
            return Ok((theta, residual, iter));
        }
        let mut h = objectives::mean_loss_hessian(spec, ds, rows, &theta);
        // a small ridge keeps every coordinate subproblem strictly convex
        h.add_diagonal(1e-10 * (1.0 + h.trace() / h.dim() as f64));
        let mut linear = h.matvec(&theta);
        linear.axpy(-1.0, &g);
        let sub_tol = (residual * 1e-3).clamp(tol * 1e-3, 1e-6);
        let target = QuadraticProblem { h: &h, linear: &linear, l1, l2 }.solve(&theta, sub_tol, prox::MAX_SWEEPS)?;
        let step = target.sub(&theta);
        let decrease = g.dot(&step) + penalty(&target) - penalty(&theta);
        let f0 = objectives::mean_loss(spec, ds, rows, &theta) + penalty(&theta);
        if -decrease <= FLAT_DECREMENT * (1.0 + f0.abs()) {
            theta = target;
            continue;
        }
        let mut t = 1.0;
        loop {
            let trial = theta.add(&step.scaled(t));
            let f = objectives::mean_loss(spec, ds, rows, &trial) + penalty(&trial);
            if f <= f0 + ARMIJO * t * decrease {
                theta = trial;
                break;
            }
            t *= 0.5;
            if t < MIN_STEP {
                theta = trial;
                break;
            }
        }
    }
    Err(Error::DidNotConverge { max_iters, residual })
}
