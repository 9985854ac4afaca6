use std::path::PathBuf;

use thiserror::Error;

use crate::data::SampleId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("logistic loss needs labels in {{-1, +1}}, found {0}")]
    BadLabel(f64),

    #[error("derivative requested for a non-smooth regularizer")]
    NonSmoothRegularizer,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid smoothness constants: {0}")]
    ConstantsInvalid(String),

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("solver did not converge within {max_iters} iterations (residual {residual:e})")]
    DidNotConverge { max_iters: usize, residual: f64 },

    #[error("deletion request would remove every training row")]
    AllDataDeleted,

    #[error("unlearner branch does not match the smoothness of the regularizer")]
    BranchMismatch,

    #[error("sample {0} has already been deleted")]
    AlreadyDeleted(SampleId),

    #[error("sample {0} is not part of the dataset")]
    UnknownId(SampleId),

    #[error("deletion capacity exhausted: {requested} deletions requested, lower bound is {capacity}")]
    CapacityExhausted { requested: usize, capacity: u64 },

    #[error("invalid privacy budget: {0}")]
    BadBudget(String),

    #[error("deletion capacity bound is only claimed for epsilon <= 1 and delta <= 0.005")]
    OutOfRegime,

    #[error("counterexample needs n >= 2, got {0}")]
    BadN(usize),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("row at line {line} has {found} fields, expected {expected}")]
    RaggedRows { line: usize, expected: usize, found: usize },

    #[error("label at line {line} is {value}, expected a binary label")]
    NonBinaryLabels { line: usize, value: f64 },

    #[error("bad shape: {0}")]
    BadShape(String),

    #[error("stream of {requested} deletions is too long for {available} eligible rows")]
    StreamTooLong { requested: usize, available: usize },

    #[error("self-check failed: {0}")]
    CheckFailed(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::BadBudget(_)
            | Error::OutOfRegime
            | Error::BadN(_)
            | Error::BadShape(_)
            | Error::Parse { .. }
            | Error::RaggedRows { .. }
            | Error::NonBinaryLabels { .. }
            | Error::BadLabel(_)
            | Error::StreamTooLong { .. }
            | Error::UnknownId(_)
            | Error::InvalidObjective(_)
            | Error::BranchMismatch
            | Error::EmptyDataset => 2,
            Error::Io { .. } | Error::Json(_) => 1,
            _ => 3,
        }
    }
}
