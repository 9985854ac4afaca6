use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numkit::{factorize, SymMatrix};
use crate::objectives::RegKind;
use crate::prox::{prox_diagonal, prox_solve, ProxProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxCheckReport {
    pub problems: usize,
    /// Largest max-norm gap between the solver and a grid search on random
    /// one- and two-dimensional problems.
    pub max_grid_gap: f64,
    /// Largest max-norm gap to the closed form for diagonal metrics.
    pub max_diagonal_gap: f64,
    pub grid_tolerance: f64,
    pub diagonal_tolerance: f64,
    pub passed: bool,
}

pub const GRID_TOLERANCE: f64 = 1e-3;
pub const DIAGONAL_TOLERANCE: f64 = 1e-10;

/// Compares the metric prox against brute force on `problems` random
/// instances of each kind.
pub fn run_prox_check(problems: usize, seed: u64) -> Result<ProxCheckReport> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut max_grid_gap = 0.0f64;
    let mut max_diagonal_gap = 0.0f64;
    for k in 0..problems {
        let d = 1 + k % 2;
        let h = random_metric(&mut rng, d);
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let lambda = rng.random_range(0.05..2.0);
        let reg = random_reg(&mut rng);
        let f = factorize(&h)?;
        let out = prox_solve(&ProxProblem::new(&v, &f, lambda, reg))?;
        let brute = grid_minimize(|t| prox_objective(&h, &v, lambda, reg, t), &v);
        max_grid_gap = max_grid_gap.max(out.max_abs_diff(&brute));

        let d = rng.random_range(1..=6);
        let diag: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..5.0)).collect();
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let f = factorize(&SymMatrix::diagonal(&diag))?;
        let out = prox_solve(&ProxProblem::new(&v, &f, lambda, reg).with_tol(1e-13))?;
        max_diagonal_gap = max_diagonal_gap.max(out.max_abs_diff(&prox_diagonal(&v, &diag, lambda, reg)));
    }
    Ok(ProxCheckReport {
        problems,
        max_grid_gap,
        max_diagonal_gap,
        grid_tolerance: GRID_TOLERANCE,
        diagonal_tolerance: DIAGONAL_TOLERANCE,
        passed: max_grid_gap <= GRID_TOLERANCE && max_diagonal_gap <= DIAGONAL_TOLERANCE,
    })
}

fn random_metric(rng: &mut impl Rng, d: usize) -> SymMatrix {
    let mut h = SymMatrix::zeros(d);
    for _ in 0..d + 1 {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
        h.add_rank_one(1.0, &x);
    }
    h.add_diagonal(0.2);
    h
}

fn random_reg(rng: &mut impl Rng) -> RegKind {
    if rng.random::<bool>() {
        RegKind::L1
    } else {
        RegKind::ElasticNet { mix: rng.random_range(0.2..1.0) }
    }
}

/// `0.5 (v - t)^T H (v - t) + lambda pi(t)`.
pub fn prox_objective(h: &SymMatrix, v: &[f64], lambda: f64, reg: RegKind, t: &[f64]) -> f64 {
    let diff: Vec<f64> = v.iter().zip(t).map(|(a, b)| a - b).collect();
    0.5 * h.quad_form(&diff) + lambda * reg.value(t)
}

/// Coarse-to-fine grid search of a convex function of one or two variables
/// around `center`.
fn grid_minimize(f: impl Fn(&[f64]) -> f64, center: &[f64]) -> Vec<f64> {
    const STEPS: i32 = 40;
    let d = center.len();
    let mut best = center.to_vec();
    let mut half_width = 4.0 + center.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    while half_width > 1e-6 {
        let h = half_width / STEPS as f64;
        let base = best.clone();
        let mut best_val = f(&best);
        let offsets: Vec<i32> = (-STEPS..=STEPS).collect();
        let second: &[i32] = if d == 2 { &offsets } else { &[0] };
        for &i in &offsets {
            for &j in second {
                let mut t = base.clone();
                t[0] += i as f64 * h;
                if d == 2 {
                    t[1] += j as f64 * h;
                }
                let val = f(&t);
                if val < best_val {
                    best_val = val;
                    best = t;
                }
            }
        }
        half_width = 4.0 * h;
    }
    best
}
