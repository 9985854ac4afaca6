use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, SampleId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StreamKind {
    /// Draws without replacement, uniformly.
    UniformRandom,
    /// Each draw takes a positive-label row with probability `p_positive`,
    /// falling back to the other class once one runs out.
    LabelBiased { p_positive: f64 },
    /// A fixed list of identifiers, used as is.
    ExplicitList { ids: Vec<SampleId> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamPolicy {
    pub kind: StreamKind,
    /// Number of deletion requests (ignored for explicit lists).
    pub length: usize,
    pub seed: u64,
}

/// Ordered deletion requests over the rows of `ds`. At least one row always
/// survives.
pub fn make_stream(policy: &StreamPolicy, ds: &Dataset) -> Result<Vec<SampleId>> {
    let n = ds.n();
    let length = match &policy.kind {
        StreamKind::ExplicitList { ids } => ids.len(),
        _ => policy.length,
    };
    if length >= n {
        return Err(Error::StreamTooLong { requested: length, available: n - 1 });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(policy.seed);
    match &policy.kind {
        StreamKind::UniformRandom => {
            let mut ids = ds.ids().to_vec();
            ids.shuffle(&mut rng);
            ids.truncate(length);
            Ok(ids)
        }
        StreamKind::LabelBiased { p_positive } => {
            if !(0.0..=1.0).contains(p_positive) {
                return Err(Error::Config(format!("p_positive must lie in [0, 1], got {p_positive}")));
            }
            let (mut pos, mut neg) = (Vec::new(), Vec::new());
            for i in 0..n {
                if ds.target(i) > 0.0 {
                    pos.push(ds.id(i));
                } else {
                    neg.push(ds.id(i));
                }
            }
            pos.shuffle(&mut rng);
            neg.shuffle(&mut rng);
            let mut out = Vec::with_capacity(length);
            while out.len() < length {
                let take_pos = match (pos.is_empty(), neg.is_empty()) {
                    (false, false) => rng.random::<f64>() < *p_positive,
                    (false, true) => true,
                    (true, false) => false,
                    (true, true) => unreachable!("length < n"),
                };
                let next = if take_pos { pos.pop() } else { neg.pop() };
                out.extend(next);
            }
            Ok(out)
        }
        StreamKind::ExplicitList { ids } => {
            let mut seen = BTreeSet::new();
            for &id in ids {
                ds.row_of(id)?;
                if !seen.insert(id) {
                    return Err(Error::AlreadyDeleted(id));
                }
            }
            Ok(ids.clone())
        }
    }
}
