//! Approximate removal of training points from a fitted model.
//!
//! [`UnlearnerState`] handles a stream of single deletions. It pays for one
//! Hessian factorization up front, and after that each deletion costs one
//! triangular solve. [`ta_batch_remove`] takes a Newton step from the
//! full-data minimizer toward the leave-out objective, refactoring the
//! leave-out Hessian on every call. Both publish a Gaussian-perturbed
//! parameter vector whose noise scale is tied to a privacy budget.

mod batch;
mod noise;
mod stream;

use serde::{Deserialize, Serialize};

pub use batch::{batch_stream_check, ij_batch_remove, ta_batch_remove, EquivalenceGap, TaOptions};
pub use noise::{
    batch_noise_scale, capacity_constant, capacity_lower_bound, generalization_bound, leave_out_shift_bound,
    noise_scale, proximity_bound, Budget, BATCH_NOISE_FORMULA,
};
pub use stream::{init_unlearner, UnlearnerState};

use crate::data::SampleId;
use crate::error::{Error, Result};
use crate::numkit::Vector;
use crate::objectives::ObjectiveSpec;

/// Default risk level used for the deletion-capacity check.
pub const DEFAULT_CAPACITY_GAMMA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Smooth,
    NonSmooth,
}

impl Branch {
    pub fn of(spec: &ObjectiveSpec) -> Branch {
        if spec.is_smooth() {
            Branch::Smooth
        } else {
            Branch::NonSmooth
        }
    }

    pub(crate) fn check(self, spec: &ObjectiveSpec) -> Result<()> {
        if self == Branch::of(spec) {
            Ok(())
        } else {
            Err(Error::BranchMismatch)
        }
    }
}

/// How the published noise scale is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// From the budget and the smoothness constants.
    Calibrated,
    /// A fixed standard deviation for every release.
    Fixed(f64),
    /// No noise; published equals noiseless.
    Disabled,
}

/// Which point the non-smooth update is anchored at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NonSmoothUpdate {
    /// Proximal Newton step on the leave-out objective: the accumulated
    /// update is shifted by `-H^{-1} grad L_n(theta_hat)` (which is nonzero
    /// at a non-smooth minimizer) and the penalty is rescaled to the rows
    /// that remain.
    #[default]
    LeaveOutProxNewton,
    /// Proximal step applied to the accumulated update as is, with the
    /// original penalty weight.
    Literal,
}

/// What happens when a deletion would exceed the deletion-capacity bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CapacityPolicy {
    /// Log a warning once and mark the affected releases.
    #[default]
    Warn,
    /// Refuse the deletion with [`Error::CapacityExhausted`].
    Error,
    /// Skip the check.
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnlearnerConfig {
    pub budget: Budget,
    pub seed: u64,
    pub branch: Branch,
    pub noise: NoiseMode,
    pub non_smooth_update: NonSmoothUpdate,
    pub capacity_policy: CapacityPolicy,
    pub capacity_gamma: f64,
    /// Tolerance of the proximal solves in the non-smooth branch.
    pub prox_tol: f64,
}

impl UnlearnerConfig {
    pub fn new(budget: Budget, seed: u64, branch: Branch) -> Self {
        UnlearnerConfig {
            budget,
            seed,
            branch,
            noise: NoiseMode::Calibrated,
            non_smooth_update: NonSmoothUpdate::default(),
            capacity_policy: CapacityPolicy::default(),
            capacity_gamma: DEFAULT_CAPACITY_GAMMA,
            prox_tol: crate::prox::DEFAULT_TOL,
        }
    }

    pub fn with_noise(mut self, noise: NoiseMode) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_non_smooth_update(mut self, update: NonSmoothUpdate) -> Self {
        self.non_smooth_update = update;
        self
    }

    pub fn with_capacity_policy(mut self, policy: CapacityPolicy) -> Self {
        self.capacity_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        if let NoiseMode::Fixed(c) = self.noise {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::BadBudget(format!("fixed noise scale must be >= 0, got {c}")));
            }
        }
        if !(self.capacity_gamma >= 0.0) || !self.capacity_gamma.is_finite() {
            return Err(Error::BadBudget(format!("gamma must be >= 0, got {}", self.capacity_gamma)));
        }
        Ok(())
    }
}

/// A released model after one or more deletions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovedModel {
    /// The released (noisy) parameters.
    pub published: Vector,
    /// The same release before noise was added.
    pub noiseless: Vector,
    /// Standard deviation of the added Gaussian noise.
    pub noise_scale: f64,
    /// Total number of deleted points behind this release.
    pub deleted: usize,
    /// Set once the number of deletions passes the capacity bound.
    pub capacity_exceeded: bool,
}

impl RemovedModel {
    pub(crate) fn release(noiseless: Vector, noise_scale: f64, seed: u64, deleted: usize) -> Self {
        let noise = crate::numkit::gaussian_sample(noise_scale, noiseless.dim(), seed);
        RemovedModel {
            published: noiseless.add(&noise),
            noiseless,
            noise_scale,
            deleted,
            capacity_exceeded: false,
        }
    }
}

/// Seed of the noise draw for a release after `m` prior deletions that
/// removes `id`.
pub(crate) fn release_seed(seed: u64, m: usize, id: SampleId) -> u64 {
    crate::numkit::derive_seed(crate::numkit::derive_seed(seed, m as u64), id as u64)
}
