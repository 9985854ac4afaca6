use std::collections::{BTreeSet, HashMap};

use super::{
    capacity_lower_bound, noise_scale, release_seed, Branch, Budget, CapacityPolicy, NoiseMode, NonSmoothUpdate,
    RemovedModel, UnlearnerConfig,
};
use crate::data::{Dataset, SampleId};
use crate::error::{Error, Result};
use crate::numkit::{factorize, PdFactor, Vector};
use crate::objectives::{self, estimate_constants, ObjectiveSpec, SmoothnessConstants};
use crate::prox::{prox_solve, ProxProblem};
use crate::trainer::ModelState;

/// Streaming single-point remover.
///
/// Holds the factor of the full-data Hessian at the fitted parameters, the
/// per-sample update gradients at those parameters and the running sum of
/// Newton corrections. Deleting a point is a solve against the stored factor
/// and never touches the rest of the dataset.
#[derive(Debug, Clone)]
pub struct UnlearnerState {
    config: UnlearnerConfig,
    spec: ObjectiveSpec,
    n: usize,
    d: usize,
    theta_hat: Vector,
    factor: PdFactor,
    /// Row-major `n x d` gradients of each sample at `theta_hat`.
    grads: Vec<f64>,
    rows: HashMap<SampleId, usize>,
    /// `theta_hat + (1/n) H^{-1} sum_{deleted} g_i`.
    accumulator: Vector,
    /// `-H^{-1} grad L_n(theta_hat)`; only set for the non-smooth
    /// leave-out update.
    stationary_offset: Option<Vector>,
    constants: Option<SmoothnessConstants>,
    capacity: Option<u64>,
    deleted: BTreeSet<SampleId>,
    order: Vec<SampleId>,
    capacity_warned: bool,
}

/// Builds an unlearner with calibrated noise and default options.
pub fn init_unlearner(
    ds: &Dataset,
    model: &ModelState,
    budget: Budget,
    seed: u64,
    branch: Branch,
) -> Result<UnlearnerState> {
    UnlearnerState::new(ds, model, UnlearnerConfig::new(budget, seed, branch))
}

impl UnlearnerState {
    pub fn new(ds: &Dataset, model: &ModelState, config: UnlearnerConfig) -> Result<Self> {
        config.validate()?;
        let spec = model.spec.clone();
        config.branch.check(&spec)?;
        if ds.n() != model.n {
            return Err(Error::BadShape(format!("model was fitted on {} rows, dataset has {}", model.n, ds.n())));
        }
        if ds.d() != model.theta.dim() {
            return Err(Error::DimensionMismatch { expected: model.theta.dim(), found: ds.d() });
        }
        spec.check_dataset(ds)?;
        let (n, d) = (ds.n(), ds.d());
        let theta = &model.theta;
        let all = objectives::all_rows(ds);

        let constants = match estimate_constants(ds, &spec, theta) {
            Ok(c) if c.validate().is_ok() => Some(c),
            Ok(c) => {
                if config.noise == NoiseMode::Calibrated {
                    c.validate()?;
                }
                None
            }
            Err(e) => return Err(e),
        };

        let hessian = match config.branch {
            Branch::Smooth => objectives::smooth_hessian(&spec, ds, &all, theta),
            Branch::NonSmooth => objectives::mean_loss_hessian(&spec, ds, &all, theta),
        };
        let factor = factorize(&hessian)?;

        let grads = objectives::sample_update_grads(&spec, ds, theta);
        let rows = (0..n).map(|i| (ds.id(i), i)).collect();

        let stationary_offset = match (config.branch, config.non_smooth_update) {
            (Branch::NonSmooth, NonSmoothUpdate::LeaveOutProxNewton) => {
                let g = objectives::mean_loss_grad(&spec, ds, &all, theta);
                Some(factor.solve(&g)?.scaled(-1.0))
            }
            _ => None,
        };

        let capacity = match (config.capacity_policy, constants) {
            (CapacityPolicy::Ignore, _) | (_, None) => None,
            (_, Some(k)) => {
                let b = config.budget;
                match capacity_lower_bound(n, d, b.epsilon, b.delta, config.capacity_gamma, &k) {
                    Ok(c) => Some(c),
                    Err(Error::OutOfRegime) => None,
                    Err(e) => return Err(e),
                }
            }
        };

        Ok(UnlearnerState {
            config,
            spec,
            n,
            d,
            theta_hat: theta.clone(),
            factor,
            grads,
            rows,
            accumulator: theta.clone(),
            stationary_offset,
            constants,
            capacity,
            deleted: BTreeSet::new(),
            order: Vec::new(),
            capacity_warned: false,
        })
    }

    /// Removes `id` and returns the next release.
    ///
    /// On error the state is left unchanged.
    pub fn delete_one(&mut self, id: SampleId) -> Result<RemovedModel> {
        let row = *self.rows.get(&id).ok_or(Error::UnknownId(id))?;
        if self.deleted.contains(&id) {
            return Err(Error::AlreadyDeleted(id));
        }
        let m = self.deleted.len();
        if m + 1 >= self.n {
            return Err(Error::AllDataDeleted);
        }
        let exceeded = self.check_capacity(m + 1)?;

        let g = &self.grads[row * self.d..(row + 1) * self.d];
        let step = self.factor.solve(g)?;
        let mut accumulator = self.accumulator.clone();
        accumulator.axpy(1.0 / self.n as f64, &step);
        let noiseless = self.output_for(&accumulator, m + 1)?;
        let c = self.noise_for(m)?;

        self.accumulator = accumulator;
        self.deleted.insert(id);
        self.order.push(id);
        let mut out = RemovedModel::release(noiseless, c, release_seed(self.config.seed, m, id), m + 1);
        out.capacity_exceeded = exceeded;
        Ok(out)
    }

    /// Noiseless parameters implied by an accumulator after `deleted`
    /// removals.
    pub(crate) fn output_for(&self, accumulator: &Vector, deleted: usize) -> Result<Vector> {
        match self.config.branch {
            Branch::Smooth => Ok(accumulator.clone()),
            Branch::NonSmooth => {
                let (anchor, lambda) = match &self.stationary_offset {
                    Some(offset) => {
                        let kept = (self.n - deleted) as f64 / self.n as f64;
                        (accumulator.add(offset), self.spec.lambda * kept)
                    }
                    None => (accumulator.clone(), self.spec.lambda),
                };
                let p = ProxProblem::new(&anchor, &self.factor, lambda, self.spec.reg).with_tol(self.config.prox_tol);
                prox_solve(&p)
            }
        }
    }

    fn noise_for(&self, m: usize) -> Result<f64> {
        match self.config.noise {
            NoiseMode::Disabled => Ok(0.0),
            NoiseMode::Fixed(c) => Ok(c),
            NoiseMode::Calibrated => {
                let k = self.constants.as_ref().ok_or_else(|| {
                    Error::ConstantsInvalid("calibrated noise needs valid smoothness constants".into())
                })?;
                let b = self.config.budget;
                noise_scale(self.config.branch, m, self.n, k, b.epsilon, b.delta)
            }
        }
    }

    /// Whether a total of `total` deletions passes the capacity bound.
    fn check_capacity(&mut self, total: usize) -> Result<bool> {
        let Some(capacity) = self.capacity else {
            return Ok(false);
        };
        if total as u64 <= capacity {
            return Ok(false);
        }
        match self.config.capacity_policy {
            CapacityPolicy::Error => Err(Error::CapacityExhausted { requested: total, capacity }),
            CapacityPolicy::Warn => {
                if !self.capacity_warned {
                    log::warn!("deletion {total} exceeds the deletion capacity of {capacity}");
                    self.capacity_warned = true;
                }
                Ok(true)
            }
            CapacityPolicy::Ignore => Ok(false),
        }
    }

    pub fn config(&self) -> &UnlearnerConfig {
        &self.config
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn branch(&self) -> Branch {
        self.config.branch
    }

    pub fn theta_hat(&self) -> &Vector {
        &self.theta_hat
    }

    pub fn factor(&self) -> &PdFactor {
        &self.factor
    }

    /// Running `theta_hat + (1/n) H^{-1} sum g_i` over the deleted points.
    pub fn accumulator(&self) -> &Vector {
        &self.accumulator
    }

    /// Noiseless parameters after the deletions processed so far.
    pub fn current_noiseless(&self) -> Result<Vector> {
        self.output_for(&self.accumulator, self.deleted.len())
    }

    /// Update gradient of the sample `id` at the fitted parameters.
    pub fn sample_grad(&self, id: SampleId) -> Result<&[f64]> {
        let row = *self.rows.get(&id).ok_or(Error::UnknownId(id))?;
        Ok(&self.grads[row * self.d..(row + 1) * self.d])
    }

    pub fn deleted(&self) -> &BTreeSet<SampleId> {
        &self.deleted
    }

    /// Deleted identifiers in the order they were removed.
    pub fn deletion_order(&self) -> &[SampleId] {
        &self.order
    }

    pub fn constants(&self) -> Option<&SmoothnessConstants> {
        self.constants.as_ref()
    }

    /// Deletion-capacity bound, when it was computable for this setting.
    pub fn capacity(&self) -> Option<u64> {
        self.capacity
    }
}
