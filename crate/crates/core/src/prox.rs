//! Proximal operator in a Hessian metric,
//!
//! ```text
//! prox_{lambda pi}^H(v) = argmin_theta 0.5 ||v - theta||_H^2 + lambda pi(theta)
//! ```
//!
//! solved by cyclic coordinate descent. Each coordinate subproblem is a
//! one-dimensional quadratic plus `|theta_j|`, whose minimizer is a
//! soft-threshold, which is what makes `l1` and elastic-net penalties cheap
//! here. The smooth `(1 - mix) ||theta||^2` part of an elastic net is folded
//! into the quadratic.

use crate::error::{Error, Result};
use crate::numkit::{PdFactor, SymMatrix, Vector};
use crate::objectives::RegKind;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_SWEEPS: usize = 100_000;

#[derive(Debug, Clone, Copy)]
pub struct ProxProblem<'a> {
    /// The point `v` being projected.
    pub anchor: &'a [f64],
    /// Factor of the metric `H`; coordinate descent reads the matrix itself.
    pub metric: &'a PdFactor,
    pub lambda: f64,
    pub reg: RegKind,
    pub tol: f64,
}

impl<'a> ProxProblem<'a> {
    pub fn new(anchor: &'a [f64], metric: &'a PdFactor, lambda: f64, reg: RegKind) -> Self {
        ProxProblem { anchor, metric, lambda, reg, tol: DEFAULT_TOL }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        ProxProblem { tol, ..self }
    }
}

/// Soft-thresholding `sign(b) max(|b| - t, 0)`; exact ties go to zero.
#[inline]
pub fn soft_threshold(b: f64, t: f64) -> f64 {
    if b > t {
        b - t
    } else if b < -t {
        b + t
    } else {
        0.0
    }
}

pub fn prox_solve(p: &ProxProblem<'_>) -> Result<Vector> {
    let h = p.metric.matrix();
    let d = h.dim();
    if p.anchor.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: p.anchor.len() });
    }
    if !(p.lambda > 0.0) || !p.lambda.is_finite() {
        return Err(Error::InvalidObjective(format!("prox needs lambda > 0, got {}", p.lambda)));
    }
    p.reg.validate()?;
    let q = h.matvec(p.anchor);
    let qp = QuadraticProblem {
        h,
        linear: &q,
        l1: p.lambda * p.reg.l1_weight(),
        l2: p.lambda * p.reg.l2_weight(),
    };
    qp.solve(p.anchor, p.tol, MAX_SWEEPS)
}

/// Closed form for a diagonal metric: per-coordinate soft-threshold at
/// `lambda mix / H_jj`, shrunk by the squared-norm part.
pub fn prox_diagonal(anchor: &[f64], diag: &[f64], lambda: f64, reg: RegKind) -> Vector {
    let l1 = lambda * reg.l1_weight();
    let l2 = lambda * reg.l2_weight();
    Vector::from_fn(anchor.len(), |j| soft_threshold(diag[j] * anchor[j], l1) / (diag[j] + 2.0 * l2))
}

/// `dist(H (theta - v), -lambda d pi(theta))` in the max norm: the first-order
/// optimality residual of a prox output.
pub fn prox_residual(p: &ProxProblem<'_>, theta: &[f64]) -> f64 {
    let h = p.metric.matrix();
    let q = h.matvec(p.anchor);
    let qp = QuadraticProblem {
        h,
        linear: &q,
        l1: p.lambda * p.reg.l1_weight(),
        l2: p.lambda * p.reg.l2_weight(),
    };
    let mut g = h.matvec(theta);
    for j in 0..g.len() {
        g[j] -= q[j];
    }
    qp.kkt_residual(theta, &g)
}

/// `min 0.5 theta^T H theta - linear^T theta + l1 ||theta||_1 + l2 ||theta||^2`.
pub(crate) struct QuadraticProblem<'a> {
    pub h: &'a SymMatrix,
    pub linear: &'a [f64],
    pub l1: f64,
    pub l2: f64,
}

impl QuadraticProblem<'_> {
    /// Max-norm KKT violation given `grad = H theta - linear`.
    fn kkt_residual(&self, theta: &[f64], grad: &[f64]) -> f64 {
        theta
            .iter()
            .zip(grad)
            .map(|(&t, &g)| {
                let g = g + 2.0 * self.l2 * t;
                if t > 0.0 {
                    (g + self.l1).abs()
                } else if t < 0.0 {
                    (g - self.l1).abs()
                } else {
                    (g.abs() - self.l1).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    /// Cyclic coordinate descent from `start`. Stops once a sweep moves no
    /// coordinate by more than `tol / 10` and the KKT residual is below
    /// `tol (1 + ||linear||)`.
    pub fn solve(&self, start: &[f64], tol: f64, max_sweeps: usize) -> Result<Vector> {
        let d = self.h.dim();
        let dense = self.h.to_rows();
        let scale = 1.0 + self.linear.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut theta = start.to_vec();
        let mut grad = self.fresh_grad(&theta);
        let mut residual = f64::INFINITY;
        for sweep in 0..max_sweeps {
            let mut max_step = 0.0f64;
            for j in 0..d {
                let hjj = dense[j][j];
                let a = hjj + 2.0 * self.l2;
                if a <= 0.0 {
                    return Err(Error::NotPositiveDefinite { row: j, pivot: a });
                }
                let old = theta[j];
                let b = hjj * old - grad[j];
                let new = soft_threshold(b, self.l1) / a;
                let step = new - old;
                if step != 0.0 {
                    theta[j] = new;
                    for (gk, hkj) in grad.iter_mut().zip(&dense[j]) {
                        *gk += step * hkj;
                    }
                    max_step = max_step.max(step.abs());
                }
            }
            if sweep % 16 == 15 {
                grad = self.fresh_grad(&theta);
            }
            if max_step <= tol / 10.0 {
                grad = self.fresh_grad(&theta);
                residual = self.kkt_residual(&theta, &grad);
                if residual <= tol * scale {
                    return Ok(Vector::from(theta));
                }
            }
        }
        Err(Error::DidNotConverge { max_iters: max_sweeps, residual })
    }

    fn fresh_grad(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = self.h.matvec(theta).into_inner();
        for (gj, qj) in g.iter_mut().zip(self.linear) {
            *gj -= qj;
        }
        g
    }
}
