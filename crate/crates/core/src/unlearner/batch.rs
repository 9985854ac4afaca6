use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{
    batch_noise_scale, release_seed, Branch, Budget, NoiseMode, NonSmoothUpdate, RemovedModel, UnlearnerConfig,
    UnlearnerState,
};
use crate::data::{Dataset, SampleId};
use crate::error::{Error, Result};
use crate::numkit::{derive_seed, factorize, Vector};
use crate::objectives::{self, estimate_constants, SmoothnessConstants};
use crate::prox::{prox_solve, ProxProblem};
use crate::trainer::{remaining_rows, ModelState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaOptions {
    pub budget: Budget,
    pub seed: u64,
    pub branch: Branch,
    pub noise: NoiseMode,
    pub non_smooth_update: NonSmoothUpdate,
    /// Constants for calibrated noise; estimated at the fitted parameters
    /// when absent.
    pub constants: Option<SmoothnessConstants>,
    pub prox_tol: f64,
}

impl TaOptions {
    pub fn new(budget: Budget, seed: u64, branch: Branch) -> Self {
        TaOptions {
            budget,
            seed,
            branch,
            noise: NoiseMode::Calibrated,
            non_smooth_update: NonSmoothUpdate::default(),
            constants: None,
            prox_tol: crate::prox::DEFAULT_TOL,
        }
    }

    pub fn with_noise(mut self, noise: NoiseMode) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_constants(mut self, constants: SmoothnessConstants) -> Self {
        self.constants = Some(constants);
        self
    }
}

/// Removes all of `ids` with one Newton step on the leave-out objective,
/// starting from the fitted parameters.
///
/// Assembles and factors the Hessian of the remaining rows, so each call
/// costs one assembly and one factorization.
pub fn ta_batch_remove(
    ds: &Dataset,
    model: &ModelState,
    ids: &BTreeSet<SampleId>,
    opts: &TaOptions,
) -> Result<RemovedModel> {
    opts.budget.validate()?;
    let spec = &model.spec;
    opts.branch.check(spec)?;
    if ds.n() != model.n || ds.d() != model.theta.dim() {
        return Err(Error::BadShape("model and dataset disagree on shape".into()));
    }
    let rows = remaining_rows(ds, ids)?;
    let (n, m) = (ds.n(), ids.len());
    let theta = &model.theta;
    let kept = (n - m) as f64;

    let noiseless = match opts.branch {
        Branch::Smooth => {
            let factor = factorize(&objectives::smooth_hessian(spec, ds, &rows, theta))?;
            let mut g = Vector::zeros(ds.d());
            for &id in ids {
                g.axpy(1.0, &objectives::sample_update_grad(spec, ds.sample(ds.row_of(id)?), theta));
            }
            let mut out = theta.clone();
            out.axpy(1.0 / kept, &factor.solve(&g)?);
            out
        }
        Branch::NonSmooth => {
            let factor = factorize(&objectives::mean_loss_hessian(spec, ds, &rows, theta))?;
            let mut anchor = theta.clone();
            match opts.non_smooth_update {
                NonSmoothUpdate::LeaveOutProxNewton => {
                    let g = objectives::mean_loss_grad(spec, ds, &rows, theta);
                    anchor.axpy(-1.0, &factor.solve(&g)?);
                }
                NonSmoothUpdate::Literal => {
                    let mut g = Vector::zeros(ds.d());
                    for &id in ids {
                        g.axpy(1.0, &objectives::loss_grad(spec, ds.sample(ds.row_of(id)?), theta)?);
                    }
                    anchor.axpy(1.0 / kept, &factor.solve(&g)?);
                }
            }
            let p = ProxProblem::new(&anchor, &factor, spec.lambda, spec.reg).with_tol(opts.prox_tol);
            prox_solve(&p)?
        }
    };

    let c = match opts.noise {
        NoiseMode::Disabled => 0.0,
        NoiseMode::Fixed(c) => c,
        NoiseMode::Calibrated => {
            let k = match opts.constants {
                Some(k) => k,
                None => estimate_constants(ds, spec, theta)?,
            };
            batch_noise_scale(m, n, &k, &opts.budget)?
        }
    };
    Ok(RemovedModel::release(noiseless, c, derive_seed(opts.seed, m as u64), m))
}

impl UnlearnerState {
    /// `theta_hat + (1/n) H^{-1} sum_{ids} g_i` computed with a single solve.
    pub fn batch_accumulator(&self, ids: &[SampleId]) -> Result<Vector> {
        let mut g = Vector::zeros(self.d());
        for &id in ids {
            g.axpy(1.0, self.sample_grad(id)?);
        }
        let mut out = self.theta_hat().clone();
        out.axpy(1.0 / self.n() as f64, &self.factor().solve(&g)?);
        Ok(out)
    }
}

/// Removes all of `ids` at once with the streaming update summed in closed
/// form. Released with the same noise scale the streaming mechanism would
/// use for its last deletion.
pub fn ij_batch_remove(
    ds: &Dataset,
    model: &ModelState,
    ids: &[SampleId],
    config: &UnlearnerConfig,
) -> Result<RemovedModel> {
    let distinct: BTreeSet<SampleId> = ids.iter().copied().collect();
    if distinct.len() != ids.len() {
        let dup = ids.iter().find(|id| ids.iter().filter(|j| j == id).count() > 1).copied();
        return Err(Error::AlreadyDeleted(dup.unwrap_or_default()));
    }
    let state = UnlearnerState::new(ds, model, config.clone())?;
    let m = ids.len();
    if m >= state.n() {
        return Err(Error::AllDataDeleted);
    }
    let Some(&last) = ids.last() else {
        return Ok(RemovedModel::release(state.current_noiseless()?, 0.0, config.seed, 0));
    };
    let noiseless = state.output_for(&state.batch_accumulator(ids)?, m)?;
    let c = match config.noise {
        NoiseMode::Disabled => 0.0,
        NoiseMode::Fixed(c) => c,
        NoiseMode::Calibrated => {
            let k = state
                .constants()
                .ok_or_else(|| Error::ConstantsInvalid("calibrated noise needs valid smoothness constants".into()))?;
            super::noise_scale(config.branch, m - 1, state.n(), k, config.budget.epsilon, config.budget.delta)?
        }
    };
    Ok(RemovedModel::release(noiseless, c, release_seed(config.seed, m - 1, last), m))
}

/// Largest componentwise gaps between deleting a set one at a time and
/// deleting it in one batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceGap {
    /// Gap between the accumulated Newton updates.
    pub accumulator: f64,
    /// Gap between the noiseless outputs (after the proximal step for
    /// non-smooth objectives).
    pub output: f64,
}

/// Deletes `ids` one by one from a fresh unlearner, and in one batch from
/// another, and compares the noiseless results.
pub fn batch_stream_check(
    ds: &Dataset,
    model: &ModelState,
    ids: &[SampleId],
    config: &UnlearnerConfig,
) -> Result<EquivalenceGap> {
    let config = UnlearnerConfig { noise: NoiseMode::Disabled, ..config.clone() };
    let mut stream = UnlearnerState::new(ds, model, config.clone())?;
    let mut last = None;
    for &id in ids {
        last = Some(stream.delete_one(id)?);
    }
    let batch = UnlearnerState::new(ds, model, config)?;
    let acc = batch.batch_accumulator(ids)?;
    let out = batch.output_for(&acc, ids.len())?;
    let stream_out = match last {
        Some(r) => r.noiseless,
        None => stream.current_noiseless()?,
    };
    Ok(EquivalenceGap {
        accumulator: stream.accumulator().max_abs_diff(&acc),
        output: stream_out.max_abs_diff(&out),
    })
}
