//! Instance generators: the greedy worst case, the knapsack reduction,
//! seeded random collections and proxy-classifier twins.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::{Instance, ScoreKind};

/// Version of the random and proxy sampling schemes. Bump on any change to
/// the sampling code; fixtures depend on it.
pub const RANDOM_SCHEME_VERSION: u32 = 1;

/// Standard deviation of the per-entry logit noise in [`gen_random`].
pub const RANDOM_LOGIT_SPREAD: f64 = 2.0;

/// Concentration at which at least 95% of seeded 16-photo, 8-location
/// collections are top-1 accurate before any deletion.
pub const CALIBRATED_CONCENTRATION: f64 = 2.0;

/// The `a` entry of the greedy worst case, chosen so the full collection
/// still predicts the true location.
pub fn observation1_a(epsilon: f64) -> f64 {
    let lo = 1.0 / 3.0 - epsilon;
    let hi = 1.0 / 3.0 + epsilon;
    lo * lo * (1.0 / 3.0 - 2.0 * epsilon) / (2.0 * hi * hi)
}

/// `N` uniform photos followed by three photos built so that greedy
/// deletion wastes `N` deletions while two well-chosen deletions push the
/// true location (index 2) to last place.
pub fn gen_observation1(n: usize, epsilon: f64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Generator("observation1 needs N >= 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0 / 6.0) {
        return Err(Error::Generator(format!("epsilon must be in (0, 1/6), got {epsilon}")));
    }
    let a = observation1_a(epsilon);
    let third = 1.0 / 3.0;
    let mut probs = vec![[third, third, third]; n];
    probs.push([a, 2.0 * third + epsilon - a, third - epsilon]);
    probs.push([2.0 * third + epsilon - a, a, third - epsilon]);
    probs.push([third + epsilon, third + epsilon, third - 2.0 * epsilon]);
    let rows = probs.iter().map(|p| p.iter().map(|x| x.ln()).collect()).collect();
    Ok(Instance::from_rows(rows, 2, ScoreKind::LogProbability)?.with_metadata(json!({
        "generator": "observation1",
        "n": n,
        "epsilon": epsilon,
        "a": a,
    })))
}

/// A knapsack decision instance: pick objects with total weight at most
/// `capacity` and total value at least `value_bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackParams {
    pub values: Vec<u64>,
    pub weights: Vec<u64>,
    pub value_bound: u64,
    pub capacity: u64,
}

/// Location layout of knapsack-reduction instances.
pub const KNAPSACK_TRUE: usize = 0;
pub const KNAPSACK_VALUE_RIVAL: usize = 1;
pub const KNAPSACK_WEIGHT_RIVAL: usize = 2;

/// One photo per object with scores `[0, v_i, -w_i]` plus a closing photo
/// `[0, -V, W]`. Both rivals reach the true location on a kept set exactly
/// when the kept objects form a knapsack solution.
pub fn gen_knapsack_reduction(params: &KnapsackParams) -> Result<Instance> {
    let KnapsackParams { values, weights, value_bound, capacity } = params;
    if values.is_empty() || values.len() != weights.len() {
        return Err(Error::Generator("values and weights must be non-empty and equally long".into()));
    }
    if values.iter().chain(weights).any(|&x| x == 0) || *value_bound == 0 || *capacity == 0 {
        return Err(Error::Generator("knapsack values, weights, V and W must be positive".into()));
    }
    let mut rows: Vec<Vec<f64>> =
        values.iter().zip(weights).map(|(&v, &w)| vec![0.0, v as f64, -(w as f64)]).collect();
    rows.push(vec![0.0, -(*value_bound as f64), *capacity as f64]);
    Ok(Instance::from_rows(rows, KNAPSACK_TRUE, ScoreKind::Raw)?.with_metadata(json!({
        "generator": "knapsack",
        "knapsack": params,
    })))
}

fn log_softmax(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_total = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    for x in row {
        *x -= log_total;
    }
}

/// Seeded stand-in for classifier outputs.
///
/// Scheme v1: a `ChaCha8Rng` seeded with `seed` first draws the true
/// location uniformly from `0..M`, then for each photo in order and each
/// location in order a standard normal `z`; the logit is
/// `RANDOM_LOGIT_SPREAD * z`, plus `concentration` on the true location,
/// and each row is stored as its log-softmax.
pub fn gen_random(n: usize, m: usize, concentration: f64, seed: u64) -> Result<Instance> {
    if n == 0 || m < 2 {
        return Err(Error::Generator(format!("need N >= 1 and M >= 2, got N={n}, M={m}")));
    }
    if !(concentration.is_finite() && concentration > 0.0) {
        return Err(Error::Generator(format!("concentration must be positive, got {concentration}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = rng.random_range(0..m);
    let rows = (0..n)
        .map(|_| {
            let mut row: Vec<f64> = (0..m)
                .map(|j| {
                    let z: f64 = rng.sample(StandardNormal);
                    RANDOM_LOGIT_SPREAD * z + if j == t { concentration } else { 0.0 }
                })
                .collect();
            log_softmax(&mut row);
            row
        })
        .collect();
    Ok(Instance::from_rows(rows, t, ScoreKind::LogProbability)?.with_metadata(json!({
        "generator": "random",
        "version": RANDOM_SCHEME_VERSION,
        "concentration": concentration,
        "seed": seed,
    })))
}

/// A proxy-classifier twin of `base`: every log score gets independent
/// `N(0, noise_scale^2)` noise (drawn row-major from a `ChaCha8Rng` seeded
/// with `seed`) and rows are renormalized. Photo ids are preserved.
pub fn gen_proxy(base: &Instance, noise_scale: f64, seed: u64) -> Result<Instance> {
    if !(noise_scale.is_finite() && noise_scale >= 0.0) {
        return Err(Error::Generator(format!("noise scale must be non-negative, got {noise_scale}")));
    }
    if noise_scale == 0.0 {
        return Ok(base.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = base
        .rows()
        .map(|row| {
            let mut noisy: Vec<f64> = row
                .iter()
                .map(|s| {
                    let z: f64 = rng.sample(StandardNormal);
                    s + noise_scale * z
                })
                .collect();
            log_softmax(&mut noisy);
            noisy
        })
        .collect();
    let raw = crate::model::RawInstance {
        num_photos: base.num_photos(),
        num_locations: base.num_locations(),
        true_location: base.true_location(),
        score_kind: ScoreKind::LogProbability,
        photo_ids: base.photo_ids().to_vec(),
        scores: rows,
        metadata: Some(json!({
            "generator": "proxy",
            "version": RANDOM_SCHEME_VERSION,
            "noise_scale": noise_scale,
            "seed": seed,
        })),
    };
    crate::model::validate_instance(raw).map_err(Error::InvalidInstance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{collection_posterior, protected_k_mask, NORMALIZATION_TOLERANCE};

    fn argmax(v: &[f64]) -> usize {
        (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b]).then(b.cmp(&a))).unwrap()
    }

    #[test]
    fn observation1_a_value() {
        // (7/30)^2 * (2/15) / (2 * (13/30)^2) = 98 / 5070
        assert!((observation1_a(0.1) - 98.0 / 5070.0).abs() < 1e-15);
        assert!((observation1_a(0.1) - 0.019329).abs() < 1e-6);
    }

    #[test]
    fn observation1_structure() {
        for n in [1, 2, 5, 20] {
            for eps in [0.01, 0.1, 0.16] {
                let inst = gen_observation1(n, eps).unwrap();
                assert_eq!(inst.num_photos(), n + 3);
                let all = vec![true; n + 3];
                assert_eq!(protected_k_mask(&inst, &all).unwrap(), 0);
                let kept: Vec<usize> = (0..n + 3).collect();
                assert_eq!(argmax(&collection_posterior(&inst, &kept).unwrap()), 2);
                let mut without = all.clone();
                without[n] = false;
                without[n + 1] = false;
                assert_eq!(protected_k_mask(&inst, &without).unwrap(), 2);
            }
        }
        assert!(gen_observation1(1, 0.0).is_err());
        assert!(gen_observation1(1, 1.0 / 6.0).is_err());
        assert!(gen_observation1(0, 0.1).is_err());
    }

    #[test]
    fn knapsack_layout() {
        let params = KnapsackParams { values: vec![3, 2], weights: vec![2, 2], value_bound: 3, capacity: 2 };
        let inst = gen_knapsack_reduction(&params).unwrap();
        assert_eq!(inst.num_photos(), 3);
        assert_eq!(inst.row(0), &[0.0, 3.0, -2.0]);
        assert_eq!(inst.row(2), &[0.0, -3.0, 2.0]);
        assert_eq!(inst.score_kind(), ScoreKind::Raw);
        assert_eq!(inst.metadata().unwrap()["knapsack"]["capacity"], 2);
        // dropping the second object leaves S^p = 0 and S^q = 0
        assert_eq!(protected_k_mask(&inst, &[true, false, true]).unwrap(), 2);

        let single = KnapsackParams { values: vec![1], weights: vec![1], value_bound: 1, capacity: 1 };
        let inst = gen_knapsack_reduction(&single).unwrap();
        assert_eq!(protected_k_mask(&inst, &[true, true]).unwrap(), 2);

        let bad = KnapsackParams { values: vec![0], weights: vec![1], value_bound: 1, capacity: 1 };
        assert!(gen_knapsack_reduction(&bad).is_err());
    }

    #[test]
    fn random_is_deterministic_and_normalized() {
        let a = gen_random(6, 5, 1.0, 42).unwrap();
        assert_eq!(a, gen_random(6, 5, 1.0, 42).unwrap());
        assert_ne!(a, gen_random(6, 5, 1.0, 43).unwrap());
        for row in a.rows() {
            let mass: f64 = row.iter().map(|x| x.exp()).sum();
            assert!((mass - 1.0).abs() < NORMALIZATION_TOLERANCE);
        }
        assert!(gen_random(0, 5, 1.0, 0).is_err());
        assert!(gen_random(3, 1, 1.0, 0).is_err());
        assert!(gen_random(3, 3, 0.0, 0).is_err());
    }

    #[test]
    fn random_huge_concentration_puts_argmax_on_truth() {
        let inst = gen_random(20, 10, 1e4, 3).unwrap();
        for row in inst.rows() {
            assert_eq!(argmax(row), inst.true_location());
        }
    }

    #[test]
    fn random_calibration() {
        let accurate = (0..100u64)
            .filter(|&seed| {
                let inst = gen_random(16, 8, CALIBRATED_CONCENTRATION, seed).unwrap();
                protected_k_mask(&inst, &[true; 16]).unwrap() == 0
            })
            .count();
        assert!(accurate >= 95, "only {accurate}/100 accurate");
    }

    #[test]
    fn proxy_properties() {
        let base = gen_random(8, 6, 1.0, 1).unwrap();
        assert_eq!(gen_proxy(&base, 0.0, 9).unwrap(), base);
        let twin = gen_proxy(&base, 0.7, 9).unwrap();
        assert_eq!(twin, gen_proxy(&base, 0.7, 9).unwrap());
        assert_ne!(twin.row(0), base.row(0));
        assert_eq!(twin.photo_ids(), base.photo_ids());
        for row in twin.rows() {
            let mass: f64 = row.iter().map(|x| x.exp()).sum();
            assert!((mass - 1.0).abs() < NORMALIZATION_TOLERANCE);
        }
        assert!(gen_proxy(&base, -1.0, 0).is_err());
    }
}
