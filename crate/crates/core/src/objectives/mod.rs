//! Regularized empirical risk
//!
//! ```text
//! F_n(theta) = (1/n) sum_i l(z_i, theta) + lambda * pi(theta)
//! ```
//!
//! and the derivatives the solvers and removal mechanisms need. Aggregates
//! take an explicit list of row indices so that leave-out objectives are
//! evaluated without copying the dataset.

mod constants;
mod loss;
mod reg;

use serde::{Deserialize, Serialize};

pub use constants::{estimate_constants, Provenance, SmoothnessConstants};
pub use loss::LossKind;
pub use reg::RegKind;

use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::numkit::{counters, SymMatrix, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub loss: LossKind,
    pub reg: RegKind,
    pub lambda: f64,
    /// Known smoothness constants. When absent they are estimated from data
    /// wherever calibrated noise needs them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<SmoothnessConstants>,
}

impl ObjectiveSpec {
    pub fn new(loss: LossKind, reg: RegKind, lambda: f64) -> Result<Self> {
        let spec = ObjectiveSpec { loss, reg, lambda, constants: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.reg.validate()?;
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidObjective(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !self.reg.is_smooth() && self.lambda == 0.0 {
            return Err(Error::InvalidObjective("a non-smooth regularizer needs lambda > 0".into()));
        }
        if let Some(c) = &self.constants {
            c.validate()?;
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let spec = ObjectiveSpec { lambda, ..self.clone() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_constants(mut self, constants: SmoothnessConstants) -> Self {
        self.constants = Some(constants);
        self
    }

    pub fn is_smooth(&self) -> bool {
        self.reg.is_smooth()
    }

    /// Checks every target against the loss (binary labels for logistic).
    pub fn check_dataset(&self, ds: &Dataset) -> Result<()> {
        ds.targets().iter().try_for_each(|&y| self.loss.check_label(y))
    }
}

pub fn loss_value(spec: &ObjectiveSpec, z: Sample<'_>, theta: &[f64]) -> Result<f64> {
    spec.loss.value(z, theta)
}

pub fn loss_grad(spec: &ObjectiveSpec, z: Sample<'_>, theta: &[f64]) -> Result<Vector> {
    spec.loss.grad(z, theta)
}

pub fn loss_hessian(spec: &ObjectiveSpec, z: Sample<'_>, theta: &[f64]) -> Result<SymMatrix> {
    spec.loss.hessian(z, theta)
}

/// `pi(theta)`, without the `lambda` factor.
pub fn reg_value(spec: &ObjectiveSpec, theta: &[f64]) -> f64 {
    spec.reg.value(theta)
}

pub fn reg_grad_smooth(spec: &ObjectiveSpec, theta: &[f64]) -> Result<Vector> {
    spec.reg.grad(theta)
}

pub fn reg_hessian_smooth(spec: &ObjectiveSpec, theta: &[f64]) -> Result<SymMatrix> {
    spec.reg.hessian(theta.len())
}

/// Gradient of the per-sample objective `f(z, theta) = l(z, theta) + lambda pi(theta)`
/// for a smooth regularizer, or of the loss alone otherwise.
pub fn sample_update_grad(spec: &ObjectiveSpec, z: Sample<'_>, theta: &[f64]) -> Vector {
    let t = dot(z.x, theta);
    let mut g = Vector::from(z.x).scaled(spec.loss.slope_at(t, z.y));
    if spec.is_smooth() && spec.lambda > 0.0 {
        g.axpy(spec.lambda, &spec.reg.smooth_part_grad(theta));
    }
    g
}

/// [`sample_update_grad`] for every row of `ds`, row-major `n x d`.
pub fn sample_update_grads(spec: &ObjectiveSpec, ds: &Dataset, theta: &[f64]) -> Vec<f64> {
    let d = ds.d();
    let shift = if spec.is_smooth() && spec.lambda > 0.0 {
        spec.reg.smooth_part_grad(theta).scaled(spec.lambda)
    } else {
        Vector::zeros(d)
    };
    let mut out = vec![0.0; ds.n() * d];
    for (i, g) in out.chunks_exact_mut(d).enumerate() {
        let x = ds.row(i);
        let slope = spec.loss.slope_at(dot(x, theta), ds.target(i));
        for ((gj, xj), sj) in g.iter_mut().zip(x).zip(shift.iter()) {
            *gj = slope * xj + sj;
        }
    }
    out
}

pub fn all_rows(ds: &Dataset) -> Vec<usize> {
    (0..ds.n()).collect()
}

/// Mean loss over `rows`.
pub fn mean_loss(spec: &ObjectiveSpec, ds: &Dataset, rows: &[usize], theta: &[f64]) -> f64 {
    let s: f64 = rows
        .iter()
        .map(|&i| spec.loss.value_at(dot(ds.row(i), theta), ds.target(i)))
        .sum();
    s / rows.len() as f64
}

/// `mean_loss + lambda * pi`.
pub fn objective_value(spec: &ObjectiveSpec, ds: &Dataset, rows: &[usize], theta: &[f64]) -> f64 {
    mean_loss(spec, ds, rows, theta) + spec.lambda * spec.reg.value(theta)
}

pub fn mean_loss_grad(spec: &ObjectiveSpec, ds: &Dataset, rows: &[usize], theta: &[f64]) -> Vector {
    let mut g = Vector::zeros(ds.d());
    for &i in rows {
        let x = ds.row(i);
        g.axpy(spec.loss.slope_at(dot(x, theta), ds.target(i)), x);
    }
    g.scaled(1.0 / rows.len() as f64)
}

/// Gradient of the smooth part of the objective: mean loss gradient plus
/// `lambda` times the gradient of the squared-norm component.
pub fn smooth_grad(spec: &ObjectiveSpec, ds: &Dataset, rows: &[usize], theta: &[f64]) -> Vector {
    let mut g = mean_loss_grad(spec, ds, rows, theta);
    if spec.lambda > 0.0 {
        g.axpy(spec.lambda, &spec.reg.smooth_part_grad(theta));
    }
    g
}

/// Full objective gradient; only defined for smooth regularizers.
pub fn objective_grad(spec: &ObjectiveSpec, ds: &Dataset, rows: &[usize], theta: &[f64]) -> Result<Vector> {
    if !spec.is_smooth() {
        return Err(Error::NonSmoothRegularizer);
    }
    Ok(smooth_grad(spec, ds, rows, theta))
}

/// `(1/|rows|) sum l''(x_i^T theta) x_i x_i^T`.
pub fn mean_loss_hessian(spec: &ObjectiveSpec, ds: &Dataset, rows: &[usize], theta: &[f64]) -> SymMatrix {
    counters::record_hessian_assembly();
    let mut h = SymMatrix::zeros(ds.d());
    for &i in rows {
        let x = ds.row(i);
        let w = spec.loss.curvature_at(dot(x, theta), ds.target(i));
        if w != 0.0 {
            h.add_rank_one(w, x);
        }
    }
    h.scale(1.0 / rows.len() as f64);
    h
}

/// Hessian of the smooth part of the objective (loss plus the squared-norm
/// component of the regularizer).
pub fn smooth_hessian(spec: &ObjectiveSpec, ds: &Dataset, rows: &[usize], theta: &[f64]) -> SymMatrix {
    let mut h = mean_loss_hessian(spec, ds, rows, theta);
    h.add_diagonal(2.0 * spec.lambda * spec.reg.l2_weight());
    h
}

/// Full objective Hessian; only defined for smooth regularizers.
pub fn objective_hessian(spec: &ObjectiveSpec, ds: &Dataset, rows: &[usize], theta: &[f64]) -> Result<SymMatrix> {
    if !spec.is_smooth() {
        return Err(Error::NonSmoothRegularizer);
    }
    Ok(smooth_hessian(spec, ds, rows, theta))
}

/// Fraction of rows where `sign(x^T theta)` matches the label (ties count
/// as positive predictions).
pub fn accuracy(ds: &Dataset, theta: &[f64]) -> f64 {
    let hits = (0..ds.n())
        .filter(|&i| {
            let pred = if dot(ds.row(i), theta) >= 0.0 { 1.0 } else { -1.0 };
            pred == ds.target(i)
        })
        .count();
    hits as f64 / ds.n() as f64
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
