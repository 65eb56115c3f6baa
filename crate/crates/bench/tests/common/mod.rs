#![allow(dead_code)]

use nlabs::{DenseMatrix, LinearSystem, SweepOptions, TolMode, Vector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x0ab5_1996;

/// Diagonally dominant `A` with entries in `[-1, 1)` plus `n` on the diagonal.
pub fn random_system(n: usize, rng: &mut ChaCha8Rng) -> LinearSystem<f64> {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let r: f64 = rng.gen_range(-1.0..1.0);
                    if i == j {
                        r + n as f64
                    } else {
                        r
                    }
                })
                .collect()
        })
        .collect();
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    LinearSystem::new(DenseMatrix::from_rows(&rows).unwrap(), Vector::new(b).unwrap()).unwrap()
}

pub fn random_point(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Vector<f64> {
    Vector::new((0..n).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

/// `||a - b||_inf / max(||b||_inf, 1)`
pub fn rel_diff(a: &Vector<f64>, b: &Vector<f64>) -> f64 {
    let d = a.sub(b).unwrap().inf_norm();
    d / b.inf_norm().max(1.0)
}

pub fn options(freeze: bool) -> SweepOptions<f64> {
    SweepOptions { t: 1e-15, tol_mode: TolMode::Absolute, freeze }
}
