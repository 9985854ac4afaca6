//! Dense linear algebra for the parameter dimensions this crate works at.
//!
//! Everything here is deliberately small: a [`Vector`] newtype, a packed
//! symmetric matrix, a Cholesky factor and a seeded Gaussian sampler. Hessians
//! are at most a few hundred rows on a side, so dense `O(d^2)` storage and
//! `O(d^3)` factorization are the right trade.

mod cholesky;
pub mod counters;
mod sampling;
mod sym;
mod vector;

pub use cholesky::{factorize, solve, PdFactor, PIVOT_THRESHOLD};
pub use sampling::{derive_seed, gaussian_sample};
pub use sym::SymMatrix;
pub use vector::Vector;
