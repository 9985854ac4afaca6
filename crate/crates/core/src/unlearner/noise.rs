//! Gaussian-mechanism noise scales, the deletion-capacity lower bound and the
//! excess-risk bound for the removal mechanisms.

use serde::{Deserialize, Serialize};

use super::Branch;
use crate::error::{Error, Result};
use crate::objectives::SmoothnessConstants;

/// Privacy budget `(epsilon, delta)` of an unlearning guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub epsilon: f64,
    pub delta: f64,
}

impl Budget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        let b = Budget { epsilon, delta };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::BadBudget(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::BadBudget(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    /// `sqrt(2 ln(1.25 / delta)) / epsilon`, the Gaussian-mechanism multiplier.
    pub fn gaussian_factor(&self) -> f64 {
        let log_term = (1.25 / self.delta).ln();
        debug_assert!(log_term > 0.0, "delta < 1 keeps ln(1.25/delta) positive");
        (2.0 * log_term).sqrt() / self.epsilon
    }
}

/// `(2 C L mu + M L) / (mu^2 n^2)`, shared by both branches.
fn per_step_constant(n: usize, c: &SmoothnessConstants) -> f64 {
    let n = n as f64;
    (2.0 * c.hessian_lipschitz * c.lipschitz * c.mu + c.hessian_smoothness * c.lipschitz) / (c.mu * c.mu * n * n)
}

fn check(n: usize, constants: &SmoothnessConstants, budget: &Budget) -> Result<()> {
    budget.validate()?;
    constants.validate()?;
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

/// Standard deviation of the noise published with a deletion, where `m` is
/// the number of deletions processed *before* this one.
///
/// * smooth: `(2m + 1) (2 C L mu + M L) / (mu^2 n^2) * sqrt(2 ln(1.25/delta)) / epsilon`
/// * non-smooth: `(m + 1)^2 (2 C L mu + M L) / (mu^2 n^2) * sqrt(2 ln(1.25/delta)) / epsilon`
pub fn noise_scale(
    branch: Branch,
    m: usize,
    n: usize,
    constants: &SmoothnessConstants,
    epsilon: f64,
    delta: f64,
) -> Result<f64> {
    let budget = Budget { epsilon, delta };
    check(n, constants, &budget)?;
    let m = m as f64;
    let prefactor = match branch {
        Branch::Smooth => 2.0 * m + 1.0,
        Branch::NonSmooth => (m + 1.0) * (m + 1.0),
    };
    Ok(prefactor * per_step_constant(n, constants) * budget.gaussian_factor())
}

/// Noise for a batch Newton removal of `m` points at once:
/// `m^2 (2 C L mu + M L) / (mu^2 n^2) * sqrt(2 ln(1.25/delta)) / epsilon`.
/// This is the telescoped total of the smooth per-step prefactors,
/// `sum_{k<m} (2k + 1) = m^2`.
pub fn batch_noise_scale(m: usize, n: usize, constants: &SmoothnessConstants, budget: &Budget) -> Result<f64> {
    check(n, constants, budget)?;
    let m = m as f64;
    Ok(m * m * per_step_constant(n, constants) * budget.gaussian_factor())
}

/// Textual form of [`batch_noise_scale`], echoed into benchmark reports.
pub const BATCH_NOISE_FORMULA: &str =
    "c = m^2 (2 C L mu + M L) / (mu^2 n^2) * sqrt(2 ln(1.25/delta)) / epsilon, m = |U| after the batch";

/// Lower bound on the number of deletions that keep the excess risk below
/// `gamma`:
///
/// ```text
/// m = floor(c n sqrt(epsilon) / (d ln(1/delta))^(1/4)),
/// c = min(1, gamma (mu^3 / ((2 C mu + M L) L^2) + mu / (4 L^2)))
/// ```
///
/// Only claimed for `epsilon <= 1` and `delta <= 0.005`.
pub fn capacity_lower_bound(
    n: usize,
    d: usize,
    epsilon: f64,
    delta: f64,
    gamma: f64,
    constants: &SmoothnessConstants,
) -> Result<u64> {
    Budget { epsilon, delta }.validate()?;
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::BadBudget(format!("gamma must be >= 0, got {gamma}")));
    }
    if epsilon > 1.0 || delta > 0.005 {
        return Err(Error::OutOfRegime);
    }
    if d == 0 {
        return Err(Error::BadShape("dimension must be positive".into()));
    }
    if gamma == 0.0 {
        return Ok(0);
    }
    constants.validate()?;
    let c = capacity_constant(gamma, constants);
    let denom = (d as f64 * (1.0 / delta).ln()).powf(0.25);
    Ok((c * n as f64 * epsilon.sqrt() / denom).floor() as u64)
}

/// `min(1, gamma (mu^3 / ((2 C mu + M L) L^2) + mu / (4 L^2)))`.
pub fn capacity_constant(gamma: f64, k: &SmoothnessConstants) -> f64 {
    let (mu, l) = (k.mu, k.lipschitz);
    let l2 = l * l;
    let inner = mu.powi(3) / ((2.0 * k.hessian_lipschitz * mu + k.hessian_smoothness * l) * l2) + mu / (4.0 * l2);
    (gamma * inner).min(1.0)
}

/// Excess-risk bound after `m` deletions:
///
/// ```text
/// (1 + sqrt(d) sqrt(2 ln(1.25/delta)) / epsilon) (2 C mu + M L) m^2 L^2 / (mu^3 n^2)
///   + 4 m L^2 / (mu n)
/// ```
pub fn generalization_bound(
    m: usize,
    n: usize,
    d: usize,
    epsilon: f64,
    delta: f64,
    constants: &SmoothnessConstants,
) -> Result<f64> {
    let budget = Budget { epsilon, delta };
    check(n, constants, &budget)?;
    let k = constants;
    let (m, n, d) = (m as f64, n as f64, d as f64);
    let (mu, l) = (k.mu, k.lipschitz);
    let noise = 1.0 + d.sqrt() * budget.gaussian_factor();
    let second_order = (2.0 * k.hessian_lipschitz * mu + k.hessian_smoothness * l) * m * m * l * l / (mu.powi(3) * n * n);
    Ok(noise * second_order + 4.0 * m * l * l / (mu * n))
}

/// Right-hand side of the distance bound between the noiseless removal
/// output and the leave-out minimizer: `2 m^2 C L / (n^2 mu^2) + m^2 M L^2 / (n^2 mu^3)`.
pub fn proximity_bound(m: usize, n: usize, k: &SmoothnessConstants) -> f64 {
    let (m, n) = (m as f64, n as f64);
    let (mu, l) = (k.mu, k.lipschitz);
    2.0 * m * m * k.hessian_lipschitz * l / (n * n * mu * mu) + m * m * k.hessian_smoothness * l * l / (n * n * mu.powi(3))
}

/// `m L / (mu n)`, the distance bound between the full-data and leave-out
/// minimizers.
pub fn leave_out_shift_bound(m: usize, n: usize, k: &SmoothnessConstants) -> f64 {
    m as f64 * k.lipschitz / (k.mu * n as f64)
}
