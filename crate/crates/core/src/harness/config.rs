use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::stream::{StreamKind, StreamPolicy};
use crate::data::SampleId;
use crate::error::{Error, Result};
use crate::objectives::{LossKind, RegKind};
use crate::unlearner::{Budget, NoiseMode, NonSmoothUpdate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    /// Streaming removal with a single up-front factorization.
    Ij,
    /// Newton step with the leave-out Hessian, refactored per request.
    Ta,
    /// Retraining from scratch.
    Rt,
}

impl Mechanism {
    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Ij => "ij",
            Mechanism::Ta => "ta",
            Mechanism::Rt => "rt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Blobs,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegName {
    None,
    L2,
    L1,
    ElasticNet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamName {
    Uniform,
    LabelBiased,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseName {
    Calibrated,
    Fixed,
    None,
}

/// Benchmark settings. Read from a flat TOML file of `key = value` lines;
/// every key has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub dataset: DatasetKind,
    pub csv_path: Option<PathBuf>,
    pub label_column: usize,
    pub has_header: bool,
    /// Held-out fraction for CSV data; blobs always hold out 20%.
    pub test_fraction: f64,
    pub blobs_n: usize,
    pub blobs_d: usize,
    pub separation: f64,
    /// Seed of the data generator and of the CSV split.
    pub data_seed: u64,

    pub loss: LossKind,
    pub reg: RegName,
    /// Share of the `l1` part for the elastic net.
    pub mix: f64,
    pub lambda_grid: Vec<f64>,
    pub tol: f64,

    pub mechanisms: Vec<Mechanism>,
    pub stream: StreamName,
    pub deletions: usize,
    pub p_positive: f64,
    pub delete_ids: Vec<SampleId>,

    pub epsilon: f64,
    pub delta: f64,
    pub noise: NoiseName,
    pub noise_c: f64,
    pub non_smooth_update: NonSmoothUpdate,

    /// One run per seed; each seed drives the stream and the noise draws.
    pub seeds: Vec<u64>,
    /// Evaluate test accuracy every this many deletions (and at the last).
    pub eval_every: usize,
    /// The batch mechanism is re-run every this many deletions.
    pub ta_window: usize,
    /// Retrain after every deletion to measure distances, even when
    /// retraining is not one of the benchmarked mechanisms.
    pub rt_reference: bool,
    pub out: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            dataset: DatasetKind::Blobs,
            csv_path: None,
            label_column: 0,
            has_header: false,
            test_fraction: 0.2,
            blobs_n: 1000,
            blobs_d: 10,
            separation: 4.0,
            data_seed: 0,
            loss: LossKind::Logistic,
            reg: RegName::L2,
            mix: 0.5,
            lambda_grid: vec![1e-3],
            tol: crate::trainer::DEFAULT_TOL,
            mechanisms: vec![Mechanism::Ij, Mechanism::Ta, Mechanism::Rt],
            stream: StreamName::Uniform,
            deletions: 10,
            p_positive: 0.9,
            delete_ids: Vec::new(),
            epsilon: 1.0,
            delta: 1e-5,
            noise: NoiseName::Calibrated,
            noise_c: 0.01,
            non_smooth_update: NonSmoothUpdate::default(),
            seeds: vec![0],
            eval_every: 1,
            ta_window: 1,
            rt_reference: true,
            out: None,
        }
    }
}

impl BenchConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: BenchConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.mechanisms.is_empty() {
            return bad("at least one mechanism is required".into());
        }
        if self.lambda_grid.is_empty() {
            return bad("lambda_grid is empty".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.eval_every == 0 || self.ta_window == 0 {
            return bad("eval_every and ta_window must be positive".into());
        }
        if self.dataset == DatasetKind::Csv && self.csv_path.is_none() {
            return bad("dataset = \"csv\" needs csv_path".into());
        }
        if self.stream == StreamName::Explicit && self.delete_ids.is_empty() {
            return bad("stream = \"explicit\" needs delete_ids".into());
        }
        self.reg_kind().validate()?;
        self.budget()?;
        self.noise_mode().map(|_| ())
    }

    pub fn reg_kind(&self) -> RegKind {
        match self.reg {
            RegName::None => RegKind::None,
            RegName::L2 => RegKind::L2,
            RegName::L1 => RegKind::L1,
            RegName::ElasticNet => RegKind::ElasticNet { mix: self.mix },
        }
    }

    pub fn budget(&self) -> Result<Budget> {
        Budget::new(self.epsilon, self.delta)
    }

    pub fn noise_mode(&self) -> Result<NoiseMode> {
        match self.noise {
            NoiseName::Calibrated => Ok(NoiseMode::Calibrated),
            NoiseName::None => Ok(NoiseMode::Disabled),
            NoiseName::Fixed if self.noise_c >= 0.0 && self.noise_c.is_finite() => Ok(NoiseMode::Fixed(self.noise_c)),
            NoiseName::Fixed => Err(Error::Config(format!("noise_c must be >= 0, got {}", self.noise_c))),
        }
    }

    pub fn stream_policy(&self, seed: u64) -> StreamPolicy {
        let kind = match self.stream {
            StreamName::Uniform => StreamKind::UniformRandom,
            StreamName::LabelBiased => StreamKind::LabelBiased { p_positive: self.p_positive },
            StreamName::Explicit => StreamKind::ExplicitList { ids: self.delete_ids.clone() },
        };
        StreamPolicy { kind, length: self.deletions, seed }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let c = BenchConfig::from_toml_str(
            r#"
            dataset = "blobs"
            blobs_n = 200
            reg = "elastic_net"
            mix = 0.3
            mechanisms = ["ij", "rt"]
            noise = "fixed"
            noise_c = 0.01
            seeds = [1, 2, 3]
            "#,
        )
        .unwrap();
        assert_eq!(c.blobs_n, 200);
        assert_eq!(c.reg_kind(), RegKind::ElasticNet { mix: 0.3 });
        assert_eq!(c.noise_mode().unwrap(), NoiseMode::Fixed(0.01));
        assert_eq!(c.mechanisms, vec![Mechanism::Ij, Mechanism::Rt]);
    }

    #[test]
    fn rejects_unknown_keys_and_empty_lists() {
        assert!(BenchConfig::from_toml_str("colour = 3").is_err());
        assert!(BenchConfig::from_toml_str("mechanisms = []").is_err());
        assert!(BenchConfig::from_toml_str("lambda_grid = []").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = BenchConfig::default();
        assert_eq!(BenchConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap(), c);
    }
}
