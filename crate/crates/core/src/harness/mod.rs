//! Benchmark plumbing: data loading and generation, deletion streams, the
//! mechanism comparison and its line-delimited JSON report.

mod bench;
mod config;
mod csv;
mod prox_check;
mod report;
mod stream;
mod synth;

pub use bench::{load_dataset, run_bench};
pub use config::{BenchConfig, DatasetKind, Mechanism, NoiseName, RegName, StreamName};
pub use csv::{load_csv, read_csv};
pub use prox_check::{prox_objective, run_prox_check, ProxCheckReport, DIAGONAL_TOLERANCE, GRID_TOLERANCE};
pub use report::{read_report, write_lines, write_report, BenchHeader, BenchRecord, BenchReport, Environment};
pub use stream::{make_stream, StreamKind, StreamPolicy};
pub use synth::{synth_gaussian_blobs, BLOBS_TEST_FRACTION};
