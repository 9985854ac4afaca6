use std::collections::BTreeMap;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{BenchConfig, Mechanism};
use crate::error::{Error, Result};
use crate::numkit::counters::OpCounts;
use crate::objectives::SmoothnessConstants;
use crate::trainer::CvResult;

/// One mechanism's state after one deletion request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub mechanism: Mechanism,
    pub seed: u64,
    /// One-based position in the deletion stream.
    pub delete_index: usize,
    /// Seconds spent by this mechanism up to and including this request,
    /// one-time setup included.
    pub cum_runtime_s: f64,
    pub test_acc: Option<f64>,
    /// Euclidean distance of the released parameters to retraining.
    pub dist_to_rt: Option<f64>,
    pub noise_c: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub package_version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchHeader {
    pub record: String,
    pub config: BenchConfig,
    pub n_train: usize,
    pub n_test: usize,
    pub d: usize,
    pub lambda: f64,
    pub cv: Option<CvResult>,
    pub constants: Option<SmoothnessConstants>,
    pub capacity: Option<u64>,
    pub baseline_test_acc: Option<f64>,
    pub ta_noise_formula: String,
    /// Factorizations and Hessian assemblies per mechanism, summed over
    /// seeds.
    pub op_counts: BTreeMap<Mechanism, OpCounts>,
    pub environment: Environment,
    /// Set when the run stopped early; the records are then partial.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub header: BenchHeader,
    pub records: Vec<BenchRecord>,
}

impl BenchReport {
    /// Records of one mechanism and seed, in stream order.
    pub fn series(&self, mechanism: Mechanism, seed: u64) -> Vec<&BenchRecord> {
        self.records.iter().filter(|r| r.mechanism == mechanism && r.seed == seed).collect()
    }

    /// Per-index means over seeds of `(cum_runtime_s, test_acc)`.
    pub fn mean_over_seeds(&self, mechanism: Mechanism) -> Vec<(usize, f64, Option<f64>)> {
        let mut by_index: BTreeMap<usize, (f64, f64, usize, usize)> = BTreeMap::new();
        for r in self.records.iter().filter(|r| r.mechanism == mechanism) {
            let e = by_index.entry(r.delete_index).or_default();
            e.0 += r.cum_runtime_s;
            e.2 += 1;
            if let Some(a) = r.test_acc {
                e.1 += a;
                e.3 += 1;
            }
        }
        by_index
            .into_iter()
            .map(|(k, (t, a, nt, na))| (k, t / nt as f64, (na > 0).then(|| a / na as f64)))
            .collect()
    }
}

/// Writes the header and then one JSON object per record, one per line.
pub fn write_report(report: &BenchReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_lines(report, &mut w).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_lines(report: &BenchReport, w: &mut impl Write) -> Result<()> {
    let io = |e| Error::io("<report>", e);
    serde_json::to_writer(&mut *w, &report.header)?;
    w.write_all(b"\n").map_err(io)?;
    for r in &report.records {
        serde_json::to_writer(&mut *w, r)?;
        w.write_all(b"\n").map_err(io)?;
    }
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<BenchReport> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = std::io::BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{} is empty", path.display())))?
        .map_err(|e| Error::io(path, e))?;
    let header: BenchHeader = serde_json::from_str(&first)?;
    let mut records = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            records.push(serde_json::from_str(&line)?);
        }
    }
    Ok(BenchReport { header, records })
}
