#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rieszlab::{ScalarField, WeightedGraphManifold};

/// Random field with entries in `[-1, 1]`.
pub fn random_field(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Random mean-zero field on `m`.
pub fn random_mean_zero(m: &WeightedGraphManifold, seed: u64) -> ScalarField {
    rieszlab::norms::project_mean_zero(m.mu(), &ScalarField::new(random_field(m.len(), seed))).unwrap()
}

pub fn l2(m: &WeightedGraphManifold, f: &[f64]) -> f64 {
    m.inner(f, f).sqrt()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}
