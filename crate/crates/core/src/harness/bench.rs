use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use super::config::{BenchConfig, DatasetKind, Mechanism};
use super::report::{write_report, BenchHeader, BenchRecord, BenchReport, Environment};
use super::{load_csv, make_stream, synth_gaussian_blobs};
use crate::data::{Dataset, SampleId};
use crate::error::{Error, Result};
use crate::numkit::counters::OpCounts;
use crate::numkit::Vector;
use crate::objectives::{accuracy, estimate_constants, ObjectiveSpec, SmoothnessConstants};
use crate::trainer::{cv_select, train, train_leave_out, ModelState};
use crate::unlearner::{
    capacity_lower_bound, ta_batch_remove, Branch, NoiseMode, TaOptions, UnlearnerConfig, UnlearnerState,
    BATCH_NOISE_FORMULA, DEFAULT_CAPACITY_GAMMA,
};

/// Loads the configured dataset, including its train/test split.
pub fn load_dataset(config: &BenchConfig) -> Result<Dataset> {
    match config.dataset {
        DatasetKind::Blobs => synth_gaussian_blobs(config.blobs_n, config.blobs_d, config.separation, config.data_seed),
        DatasetKind::Csv => {
            let path = config.csv_path.as_ref().ok_or_else(|| Error::Config("csv_path is not set".into()))?;
            load_csv(path, config.label_column, config.has_header)?
                .with_random_split(config.test_fraction, config.data_seed)
        }
    }
}

/// Trains once, then replays the deletion stream of every seed through each
/// configured mechanism.
///
/// The regularization strength is the only grid value, or the leave-one-out
/// choice when the grid has several, and is held fixed for every mechanism
/// and deletion. Mechanisms run one after another on the calling thread so
/// their timings are comparable. If a run fails part way and `config.out`
/// is set, the records gathered so far are written there before the error
/// is returned.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let full = load_dataset(config)?;
    let train_ds = full.train_part();
    let test_ds = full.test_part();

    let template = ObjectiveSpec::new(config.loss, config.reg_kind(), config.lambda_grid[0])?;
    let (lambda, cv) = match config.lambda_grid.as_slice() {
        [only] => (*only, None),
        grid => {
            let cv = cv_select(&train_ds, &template, grid, config.tol)?;
            (cv.selected, Some(cv))
        }
    };
    let spec = template.with_lambda(lambda)?;
    let model = train(&train_ds, &spec, config.tol)?;
    let constants = estimate_constants(&train_ds, &spec, &model.theta)?;
    let constants = constants.validate().ok().map(|_| constants);
    let noise = config.noise_mode()?;
    if noise == NoiseMode::Calibrated && constants.is_none() {
        return Err(Error::ConstantsInvalid(
            "calibrated noise needs positive smoothness constants; supply them or use fixed noise".into(),
        ));
    }
    let budget = config.budget()?;
    let capacity = constants.and_then(|k| {
        capacity_lower_bound(train_ds.n(), train_ds.d(), budget.epsilon, budget.delta, DEFAULT_CAPACITY_GAMMA, &k).ok()
    });

    let mut report = BenchReport {
        header: BenchHeader {
            record: "header".into(),
            config: config.clone(),
            n_train: train_ds.n(),
            n_test: test_ds.as_ref().map_or(0, Dataset::n),
            d: train_ds.d(),
            lambda,
            cv,
            constants,
            capacity,
            baseline_test_acc: test_ds.as_ref().map(|t| accuracy(t, &model.theta)),
            ta_noise_formula: BATCH_NOISE_FORMULA.into(),
            op_counts: BTreeMap::new(),
            environment: Environment::current(),
            error: None,
        },
        records: Vec::new(),
    };

    let ctx = Context { config, train: &train_ds, test: test_ds.as_ref(), model: &model, constants, noise };
    for &seed in &config.seeds {
        if let Err(e) = ctx.run_seed(seed, &mut report) {
            if let Some(out) = &config.out {
                report.header.error = Some(e.to_string());
                write_report(&report, out)?;
            }
            return Err(e);
        }
    }
    Ok(report)
}

struct Context<'a> {
    config: &'a BenchConfig,
    train: &'a Dataset,
    test: Option<&'a Dataset>,
    model: &'a ModelState,
    constants: Option<SmoothnessConstants>,
    noise: NoiseMode,
}

/// Released parameters, noise scale and cumulative seconds after each
/// request.
type Trace = Vec<(Vector, f64, f64)>;

impl Context<'_> {
    fn run_seed(&self, seed: u64, report: &mut BenchReport) -> Result<()> {
        let stream = make_stream(&self.config.stream_policy(seed), self.train)?;
        let mechanisms: BTreeSet<Mechanism> = self.config.mechanisms.iter().copied().collect();

        let reference = if mechanisms.contains(&Mechanism::Rt) || self.config.rt_reference {
            let counts = OpCounts::current();
            let trace = self.retrain(&stream)?;
            *report.header.op_counts.entry(Mechanism::Rt).or_default() += counts.since();
            Some(trace)
        } else {
            None
        };

        for &mechanism in &self.config.mechanisms {
            let counts = OpCounts::current();
            let trace = match mechanism {
                Mechanism::Ij => self.ij(&stream, seed)?,
                Mechanism::Ta => self.ta(&stream, seed)?,
                Mechanism::Rt => reference.clone().expect("reference computed when rt is benchmarked"),
            };
            if mechanism != Mechanism::Rt {
                *report.header.op_counts.entry(mechanism).or_default() += counts.since();
            }
            for (k, (theta, noise_c, cum)) in trace.iter().enumerate() {
                let index = k + 1;
                let evaluate = index % self.config.eval_every == 0 || index == stream.len();
                report.records.push(BenchRecord {
                    mechanism,
                    seed,
                    delete_index: index,
                    cum_runtime_s: *cum,
                    test_acc: self.test.filter(|_| evaluate).map(|t| accuracy(t, theta)),
                    dist_to_rt: reference.as_ref().map(|r| theta.distance(&r[k].0)),
                    noise_c: *noise_c,
                });
            }
        }
        Ok(())
    }

    fn retrain(&self, stream: &[SampleId]) -> Result<Trace> {
        let spec = &self.model.spec;
        let mut deleted = BTreeSet::new();
        let mut cum = 0.0;
        let mut out = Vec::with_capacity(stream.len());
        for &id in stream {
            deleted.insert(id);
            let t = Instant::now();
            let m = train_leave_out(self.train, spec, &deleted, self.config.tol)?;
            cum += t.elapsed().as_secs_f64();
            out.push((m.theta, 0.0, cum));
        }
        Ok(out)
    }

    fn ij(&self, stream: &[SampleId], seed: u64) -> Result<Trace> {
        let mut unlearner_config = UnlearnerConfig::new(self.config.budget()?, seed, Branch::of(&self.model.spec))
            .with_noise(self.noise)
            .with_non_smooth_update(self.config.non_smooth_update);
        unlearner_config.prox_tol = self.config.tol;
        let t = Instant::now();
        let mut state = UnlearnerState::new(self.train, self.model, unlearner_config)?;
        let mut cum = t.elapsed().as_secs_f64();
        let mut out = Vec::with_capacity(stream.len());
        for &id in stream {
            let t = Instant::now();
            let r = state.delete_one(id)?;
            cum += t.elapsed().as_secs_f64();
            out.push((r.published, r.noise_scale, cum));
        }
        Ok(out)
    }

    fn ta(&self, stream: &[SampleId], seed: u64) -> Result<Trace> {
        let mut opts = TaOptions::new(self.config.budget()?, seed, Branch::of(&self.model.spec)).with_noise(self.noise);
        opts.non_smooth_update = self.config.non_smooth_update;
        opts.constants = self.constants;
        opts.prox_tol = self.config.tol;
        let window = self.config.ta_window;
        let mut deleted = BTreeSet::new();
        let mut cum = 0.0;
        let mut current = (self.model.theta.clone(), 0.0);
        let mut out = Vec::with_capacity(stream.len());
        for (k, &id) in stream.iter().enumerate() {
            deleted.insert(id);
            if (k + 1) % window == 0 || k + 1 == stream.len() {
                let t = Instant::now();
                let r = ta_batch_remove(self.train, self.model, &deleted, &opts)?;
                cum += t.elapsed().as_secs_f64();
                current = (r.published, r.noise_scale);
            }
            out.push((current.0.clone(), current.1, cum));
        }
        Ok(out)
    }
}
