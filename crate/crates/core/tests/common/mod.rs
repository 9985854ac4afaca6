#![allow(dead_code)]

use ij_unlearn::data::Dataset;
use ij_unlearn::harness::synth_gaussian_blobs;
use ij_unlearn::numkit::SymMatrix;
use ij_unlearn::objectives::{LossKind, ObjectiveSpec, RegKind};
use ij_unlearn::trainer::{train, ModelState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// Training part of a blob dataset.
pub fn blobs(n: usize, d: usize, separation: f64, seed: u64) -> Dataset {
    synth_gaussian_blobs(n, d, separation, seed).unwrap().train_part()
}

/// Blob rows with logistic labels drawn from a random linear model, so the
/// classes overlap and the unregularized problem is well posed.
pub fn logistic_data(n: usize, d: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let w = normal_vec(&mut r, d);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x = normal_vec(&mut r, d);
        let t: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
        let p = 1.0 / (1.0 + (-t).exp());
        labels.push(if r.random::<f64>() < p { 1.0 } else { -1.0 });
        rows.push(x);
    }
    Dataset::classification(rows, labels).unwrap()
}

pub fn regression_data(n: usize, d: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let w = normal_vec(&mut r, d);
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let x = normal_vec(&mut r, d);
        let t: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + 0.3 * r.sample::<f64, _>(StandardNormal);
        targets.push(t);
        rows.push(x);
    }
    Dataset::regression(rows, targets).unwrap()
}

pub fn fit(ds: &Dataset, loss: LossKind, reg: RegKind, lambda: f64) -> (ObjectiveSpec, ModelState) {
    let spec = ObjectiveSpec::new(loss, reg, lambda).unwrap();
    let model = train(ds, &spec, 1e-12).unwrap();
    (spec, model)
}

/// `B^T B + I` for a random `B`.
pub fn random_spd(rng: &mut impl Rng, d: usize) -> SymMatrix {
    let mut h = SymMatrix::identity(d);
    for _ in 0..d {
        let row = normal_vec(rng, d);
        h.add_rank_one(1.0, &row);
    }
    h
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
