//! Deterministic sample points for axiom checks and randomized tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebroid::BasePoint;
use crate::scalar::Real;

/// `count` points drawn uniformly from `[lo, hi]^dim` with a seeded generator.
pub fn uniform_points<T: Real>(dim: usize, count: usize, seed: u64, lo: f64, hi: f64) -> Vec<BasePoint<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let coords = (0..dim).map(|_| T::lit(rng.gen_range(lo..=hi))).collect();
            BasePoint::new(coords).expect("uniform samples are finite")
        })
        .collect()
}

/// Flat vectors drawn uniformly from `[lo, hi]^dim`.
pub fn uniform_vectors<T: Real>(dim: usize, count: usize, seed: u64, lo: f64, hi: f64) -> Vec<Vec<T>> {
    uniform_points::<T>(dim, count, seed, lo, hi)
        .into_iter()
        .map(BasePoint::into_inner)
        .collect()
}
