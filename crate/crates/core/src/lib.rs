//! Approximate removal of training points from models fitted by regularized
//! convex empirical risk minimization.
//!
//! Fit a model with [`trainer::train`], then delete points either one at a
//! time with [`unlearner::UnlearnerState`] or in batches with
//! [`unlearner::ta_batch_remove`]. The [`harness`] module runs the
//! benchmark that compares both against retraining from scratch.
//!
//! ```
//! use ij_unlearn::data::Dataset;
//! use ij_unlearn::objectives::{LossKind, ObjectiveSpec, RegKind};
//! use ij_unlearn::trainer::{train, DEFAULT_TOL};
//! use ij_unlearn::unlearner::{Branch, Budget, NoiseMode, UnlearnerConfig, UnlearnerState};
//!
//! let ds = Dataset::classification(
//!     vec![vec![1.0, 0.2], vec![0.8, -0.4], vec![-1.1, 0.3], vec![-0.7, -0.9], vec![0.3, 1.0]],
//!     vec![1.0, 1.0, -1.0, -1.0, 1.0],
//! )?;
//! let spec = ObjectiveSpec::new(LossKind::Logistic, RegKind::L2, 0.1)?;
//! let model = train(&ds, &spec, DEFAULT_TOL)?;
//!
//! let config = UnlearnerConfig::new(Budget::new(1.0, 1e-5)?, 7, Branch::Smooth).with_noise(NoiseMode::Disabled);
//! let mut unlearner = UnlearnerState::new(&ds, &model, config)?;
//! let released = unlearner.delete_one(2)?;
//! assert_eq!(released.deleted, 1);
//! # Ok::<(), ij_unlearn::Error>(())
//! ```

pub mod data;
pub mod error;
pub mod harness;
pub mod numkit;
pub mod objectives;
pub mod pitfalls;
pub mod prox;
pub mod trainer;
pub mod unlearner;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/streaming-removal.md")]
    mod streaming_removal {}
    #[doc = include_str!("../../../book/src/batch-removal.md")]
    mod batch_removal {}
    #[doc = include_str!("../../../book/src/non-smooth.md")]
    mod non_smooth {}
    #[doc = include_str!("../../../book/src/noise-and-capacity.md")]
    mod noise_and_capacity {}
    #[doc = include_str!("../../../book/src/model-selection.md")]
    mod model_selection {}
    #[doc = include_str!("../../../book/src/benchmark.md")]
    mod benchmark {}
}
