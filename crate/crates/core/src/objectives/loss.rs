use serde::{Deserialize, Serialize};

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::numkit::{SymMatrix, Vector};

/// Per-sample losses. Both are generalized linear: `l(z, theta)` depends on
/// `theta` only through the linear predictor `t = x^T theta`, so gradients
/// are `l'(t) x` and Hessians `l''(t) x x^T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `log(1 + exp(-y x^T theta))` with `y` in `{-1, +1}`.
    Logistic,
    /// `0.5 (y - x^T theta)^2`.
    SquaredError,
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(u))` without overflow.
#[inline]
fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

impl LossKind {
    pub fn check_label(self, y: f64) -> Result<()> {
        match self {
            LossKind::Logistic if y != 1.0 && y != -1.0 => Err(Error::BadLabel(y)),
            _ if !y.is_finite() => Err(Error::BadLabel(y)),
            _ => Ok(()),
        }
    }

    /// Loss as a function of the linear predictor.
    #[inline]
    pub fn value_at(self, t: f64, y: f64) -> f64 {
        match self {
            LossKind::Logistic => softplus(-y * t),
            LossKind::SquaredError => 0.5 * (y - t) * (y - t),
        }
    }

    /// `d l / d t`.
    #[inline]
    pub fn slope_at(self, t: f64, y: f64) -> f64 {
        match self {
            LossKind::Logistic => -y * sigmoid(-y * t),
            LossKind::SquaredError => t - y,
        }
    }

    /// `d^2 l / d t^2`.
    #[inline]
    pub fn curvature_at(self, t: f64, y: f64) -> f64 {
        match self {
            LossKind::Logistic => {
                let s = sigmoid(y * t);
                s * (1.0 - s)
            }
            LossKind::SquaredError => 1.0,
        }
    }

    /// Upper bound on `d^2 l / d t^2` over all `t`.
    pub fn max_curvature(self) -> f64 {
        match self {
            LossKind::Logistic => 0.25,
            LossKind::SquaredError => 1.0,
        }
    }

    pub fn value(self, z: Sample<'_>, theta: &[f64]) -> Result<f64> {
        self.check(z, theta)?;
        Ok(self.value_at(dot(z.x, theta), z.y))
    }

    pub fn grad(self, z: Sample<'_>, theta: &[f64]) -> Result<Vector> {
        self.check(z, theta)?;
        Ok(Vector::from(z.x).scaled(self.slope_at(dot(z.x, theta), z.y)))
    }

    pub fn hessian(self, z: Sample<'_>, theta: &[f64]) -> Result<SymMatrix> {
        self.check(z, theta)?;
        let mut h = SymMatrix::zeros(theta.len());
        h.add_rank_one(self.curvature_at(dot(z.x, theta), z.y), z.x);
        Ok(h)
    }

    fn check(self, z: Sample<'_>, theta: &[f64]) -> Result<()> {
        if z.x.len() != theta.len() {
            return Err(Error::DimensionMismatch { expected: z.x.len(), found: theta.len() });
        }
        self.check_label(z.y)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
