use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{SymMatrix, Vector};

/// Regularizer `pi(theta)`. The squared norm is unhalved, `pi = ||theta||^2`,
/// so its Hessian is `2 I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RegKind {
    None,
    L2,
    L1,
    /// `mix ||theta||_1 + (1 - mix) ||theta||^2`, `mix` in `[0, 1]`.
    ElasticNet { mix: f64 },
}

impl RegKind {
    /// Weight on `||theta||_1`.
    pub fn l1_weight(self) -> f64 {
        match self {
            RegKind::None | RegKind::L2 => 0.0,
            RegKind::L1 => 1.0,
            RegKind::ElasticNet { mix } => mix,
        }
    }

    /// Weight on `||theta||^2`.
    pub fn l2_weight(self) -> f64 {
        match self {
            RegKind::None | RegKind::L1 => 0.0,
            RegKind::L2 => 1.0,
            RegKind::ElasticNet { mix } => 1.0 - mix,
        }
    }

    pub fn is_smooth(self) -> bool {
        self.l1_weight() == 0.0
    }

    pub fn validate(self) -> Result<()> {
        match self {
            RegKind::ElasticNet { mix } if !(0.0..=1.0).contains(&mix) => Err(Error::InvalidObjective(
                format!("elastic net mix {mix} outside [0, 1]"),
            )),
            _ => Ok(()),
        }
    }

    pub fn value(self, theta: &[f64]) -> f64 {
        let l1: f64 = theta.iter().map(|v| v.abs()).sum();
        let l2: f64 = theta.iter().map(|v| v * v).sum();
        self.l1_weight() * l1 + self.l2_weight() * l2
    }

    /// Gradient of the smooth part, `2 (1 - mix) theta`.
    pub(crate) fn smooth_part_grad(self, theta: &[f64]) -> Vector {
        Vector::from(theta).scaled(2.0 * self.l2_weight())
    }

    pub fn grad(self, theta: &[f64]) -> Result<Vector> {
        if !self.is_smooth() {
            return Err(Error::NonSmoothRegularizer);
        }
        Ok(self.smooth_part_grad(theta))
    }

    pub fn hessian(self, d: usize) -> Result<SymMatrix> {
        if !self.is_smooth() {
            return Err(Error::NonSmoothRegularizer);
        }
        let mut h = SymMatrix::zeros(d);
        h.add_diagonal(2.0 * self.l2_weight());
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_examples() {
        let theta = [1.0, 2.0];
        assert_eq!(RegKind::L2.value(&theta), 5.0);
        assert_eq!(RegKind::L2.grad(&theta).unwrap().as_slice(), &[2.0, 4.0]);
        assert_eq!(RegKind::L2.hessian(2).unwrap(), SymMatrix::diagonal(&[2.0, 2.0]));
    }

    #[test]
    fn l1_value_and_contract() {
        assert_eq!(RegKind::L1.value(&[1.0, -2.0]), 3.0);
        assert!(matches!(RegKind::L1.grad(&[1.0]), Err(Error::NonSmoothRegularizer)));
        assert!(matches!(
            RegKind::ElasticNet { mix: 0.3 }.hessian(2),
            Err(Error::NonSmoothRegularizer)
        ));
    }

    #[test]
    fn elastic_net_mixes() {
        let en = RegKind::ElasticNet { mix: 0.25 };
        assert!((en.value(&[1.0, -2.0]) - (0.25 * 3.0 + 0.75 * 5.0)).abs() < 1e-15);
        assert!(RegKind::ElasticNet { mix: 0.0 }.is_smooth());
        assert!(RegKind::ElasticNet { mix: 1.5 }.validate().is_err());
    }
}
