//! Seeded instance families shared by the benchmarks.

use geopriv_core::gen::CALIBRATED_CONCENTRATION;
use geopriv_core::{gen_observation1, gen_random, Instance};

/// `count` calibrated random collections of `n` photos over `m` locations.
pub fn random_family(n: usize, m: usize, count: usize, seed: u64) -> Vec<Instance> {
    (0..count as u64)
        .map(|c| gen_random(n, m, CALIBRATED_CONCENTRATION, seed.wrapping_mul(7919).wrapping_add(c)).unwrap())
        .collect()
}

/// The greedy worst case with `n` uniform photos.
pub fn observation1(n: usize) -> Instance {
    gen_observation1(n, 0.1).unwrap()
}
