use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numkit::derive_seed;

/// Fraction of rows held out by [`synth_gaussian_blobs`].
pub const BLOBS_TEST_FRACTION: f64 = 0.2;

/// Two unit-variance Gaussian classes of `n / 2` rows each, centred at
/// `+-(separation / 2) e_1`, in random order, with a seeded 80/20 split.
pub fn synth_gaussian_blobs(n: usize, d: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::BadShape(format!("blob count must be even and at least 2, got {n}")));
    }
    if d == 0 {
        return Err(Error::BadShape("need at least one feature".into()));
    }
    if !(separation >= 0.0) || !separation.is_finite() {
        return Err(Error::BadShape(format!("separation must be >= 0, got {separation}")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut labels: Vec<f64> = (0..n).map(|i| if i < n / 2 { 1.0 } else { -1.0 }).collect();
    labels.shuffle(&mut rng);
    let mut x = Vec::with_capacity(n * d);
    for &y in &labels {
        for j in 0..d {
            let noise: f64 = rng.sample(StandardNormal);
            x.push(if j == 0 { noise + y * separation / 2.0 } else { noise });
        }
    }
    Dataset::from_flat(n, d, x, labels)?.with_random_split(BLOBS_TEST_FRACTION, derive_seed(seed, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_balanced() {
        let a = synth_gaussian_blobs(100, 3, 2.0, 5).unwrap();
        let b = synth_gaussian_blobs(100, 3, 2.0, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.targets().iter().filter(|&&y| y > 0.0).count(), 50);
        let split = a.split().unwrap();
        assert_eq!(split.test.len(), 20);
        assert_eq!(split.train.len(), 80);
    }

    #[test]
    fn rejects_odd_n() {
        assert!(matches!(synth_gaussian_blobs(11, 2, 1.0, 0), Err(Error::BadShape(_))));
        assert!(matches!(synth_gaussian_blobs(10, 0, 1.0, 0), Err(Error::BadShape(_))));
    }
}
