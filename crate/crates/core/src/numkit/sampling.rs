use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::Vector;

/// `d` i.i.d. draws from `N(0, scale^2)`, fully determined by `seed`.
pub fn gaussian_sample(scale: f64, d: usize, seed: u64) -> Vector {
    assert!(scale >= 0.0, "noise scale must be nonnegative");
    if scale == 0.0 {
        return Vector::zeros(d);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Vector::from_fn(d, |_| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Mixes a base seed with a stream index (splitmix64 finalizer), so that
/// every publication draws from its own reproducible stream.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scale_is_exactly_zero() {
        let v = gaussian_sample(0.0, 5, 123);
        assert!(v.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn moments_match_standard_normal() {
        let v = gaussian_sample(1.0, 100_000, 7);
        let n = v.dim() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 0.02, "std {}", var.sqrt());
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(gaussian_sample(0.3, 10, 99), gaussian_sample(0.3, 10, 99));
        assert_ne!(gaussian_sample(0.3, 10, 99), gaussian_sample(0.3, 10, 100));
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
