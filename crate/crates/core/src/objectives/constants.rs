use serde::{Deserialize, Serialize};

use super::{dot, ObjectiveSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Inflation applied to every empirically estimated constant.
pub const SAFETY_FACTOR: f64 = 1.5;

/// Radii (along each sample's own feature direction) at which Hessian
/// differences are probed.
const PROBE_RADII: [f64; 3] = [1e-3, 1e-1, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    UserSupplied,
    Estimated,
}

/// Strong convexity `mu`, gradient bound `L`, Hessian smoothness `M` and
/// loss Hessian Lipschitz constant `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessConstants {
    pub mu: f64,
    pub lipschitz: f64,
    pub hessian_smoothness: f64,
    pub hessian_lipschitz: f64,
    pub provenance: Provenance,
}

impl SmoothnessConstants {
    pub fn user(mu: f64, lipschitz: f64, hessian_smoothness: f64, hessian_lipschitz: f64) -> Self {
        SmoothnessConstants {
            mu,
            lipschitz,
            hessian_smoothness,
            hessian_lipschitz,
            provenance: Provenance::UserSupplied,
        }
    }

    /// All four constants equal to one.
    pub fn unit() -> Self {
        Self::user(1.0, 1.0, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("mu", self.mu),
            ("L", self.lipschitz),
            ("M", self.hessian_smoothness),
            ("C", self.hessian_lipschitz),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::ConstantsInvalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Smoothness constants for `spec` on `ds`, probed around `theta_ref`.
///
/// * `mu`: the regularizer's modulus (`2 lambda` times the squared-norm
///   weight) plus the smallest per-sample loss Hessian eigenvalue, floored at
///   zero. Per-sample GLM Hessians are rank one, so the loss term vanishes
///   once `d >= 2`.
/// * `L`: largest per-sample gradient norm at `theta_ref`. For smooth
///   regularizers this also covers the per-sample objective gradient.
/// * `C`, `M`: largest Hessian difference quotient over the probe radii.
///   The smooth part of the regularizer has a constant Hessian, so both
///   coincide.
///
/// `L`, `C` and `M` are inflated by [`SAFETY_FACTOR`]. Constants already
/// attached to `spec` as user supplied are returned untouched. The result is
/// not validated: a zero `mu` is returned as is and rejected by whoever needs
/// positive constants.
pub fn estimate_constants(ds: &Dataset, spec: &ObjectiveSpec, theta_ref: &[f64]) -> Result<SmoothnessConstants> {
    if let Some(c) = spec.constants.filter(|c| c.provenance == Provenance::UserSupplied) {
        return Ok(c);
    }
    if ds.n() == 0 {
        return Err(Error::EmptyDataset);
    }
    if theta_ref.len() != ds.d() {
        return Err(Error::DimensionMismatch { expected: ds.d(), found: theta_ref.len() });
    }
    spec.check_dataset(ds)?;

    let loss = spec.loss;
    let smooth = spec.is_smooth();
    let reg_grad = spec.reg.smooth_part_grad(theta_ref).scaled(spec.lambda);

    let mut min_loss_eig = f64::INFINITY;
    let mut max_grad = 0.0f64;
    let mut max_quotient = 0.0f64;
    for i in 0..ds.n() {
        let x = ds.row(i);
        let y = ds.target(i);
        let t = dot(x, theta_ref);
        let xx = dot(x, x);

        let eig = if ds.d() == 1 { loss.curvature_at(t, y) * xx } else { 0.0 };
        min_loss_eig = min_loss_eig.min(eig);

        let slope = loss.slope_at(t, y);
        let g_loss = slope.abs() * xx.sqrt();
        max_grad = max_grad.max(g_loss);
        if smooth {
            let g_obj: f64 = x
                .iter()
                .zip(reg_grad.iter())
                .map(|(xj, rj)| (slope * xj + rj).powi(2))
                .sum::<f64>()
                .sqrt();
            max_grad = max_grad.max(g_obj);
        }

        // moving by r along x / |x| shifts the linear predictor by r |x|;
        // the Hessian difference is (l''(t') - l''(t)) x x^T with norm |.| |x|^2.
        // One-sided: l'' is even for the logistic loss, so central
        // differences vanish at t = 0.
        let xnorm = xx.sqrt();
        if xnorm > 0.0 {
            let mid = loss.curvature_at(t, y);
            for r in PROBE_RADII {
                let hi = loss.curvature_at(t + r * xnorm, y);
                let lo = loss.curvature_at(t - r * xnorm, y);
                let jump = (hi - mid).abs().max((mid - lo).abs());
                max_quotient = max_quotient.max(jump * xx / r);
            }
        }
    }

    let reg_mu = 2.0 * spec.lambda * spec.reg.l2_weight();
    let quotient = SAFETY_FACTOR * max_quotient;
    Ok(SmoothnessConstants {
        mu: reg_mu + min_loss_eig.max(0.0),
        lipschitz: SAFETY_FACTOR * max_grad,
        hessian_smoothness: quotient,
        hessian_lipschitz: quotient,
        provenance: Provenance::Estimated,
    })
}
