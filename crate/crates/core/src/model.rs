//! Score matrices, collection aggregation and the rank test every solver
//! is judged against.
//!
//! Collection scores are column sums over the kept photos, accumulated in
//! ascending photo order starting from `0.0`. Every exact rank decision in
//! the crate goes through [`outranks`] on sums produced that way, so the
//! greedy baseline, the exact solvers and the evaluator never disagree on
//! a tie.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result, Violation, Violations};

/// Tolerance on the per-row probability mass of log-probability rows.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    /// Each row holds log-probabilities; exponentiated rows sum to one.
    LogProbability,
    /// Arbitrary real scores. Ranks are still well defined but there is no
    /// posterior.
    Raw,
}

/// The canonical JSON shape of an instance, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawInstance {
    pub num_photos: usize,
    pub num_locations: usize,
    pub true_location: usize,
    pub score_kind: ScoreKind,
    pub photo_ids: Vec<String>,
    pub scores: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Value>,
}

/// A validated, immutable photo collection: `N` photos scored against `M`
/// candidate locations, one of which is the true location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct Instance {
    num_photos: usize,
    num_locations: usize,
    true_location: usize,
    score_kind: ScoreKind,
    photo_ids: Vec<String>,
    scores: Vec<f64>,
    metadata: Option<Value>,
}

/// Checks every instance invariant and reports all violations at once.
pub fn validate_instance(raw: RawInstance) -> std::result::Result<Instance, Violations> {
    let mut errors = Vec::new();
    let n = raw.num_photos;
    let m = raw.num_locations;

    if n == 0 {
        errors.push(Violation::global("num_photos must be positive"));
    }
    if m < 2 {
        errors.push(Violation::global(format!("num_locations is {m}, expected at least 2")));
    }
    if raw.true_location >= m {
        errors.push(Violation::global(format!(
            "true_location {} out of range for {m} locations",
            raw.true_location
        )));
    }
    if raw.scores.len() != n {
        errors.push(Violation::global(format!("scores has {} rows, expected {n}", raw.scores.len())));
    }
    if raw.photo_ids.len() != n {
        errors.push(Violation::global(format!(
            "photo_ids has {} entries, expected {n}",
            raw.photo_ids.len()
        )));
    }
    let mut seen = HashSet::new();
    for (i, id) in raw.photo_ids.iter().enumerate() {
        if !seen.insert(id.as_str()) {
            errors.push(Violation::at_row(i, format!("duplicate photo id {id:?} at position {i}")));
        }
    }
    for (i, row) in raw.scores.iter().enumerate() {
        if row.len() != m {
            errors.push(Violation::at_row(i, format!("row {i} has {} entries, expected {m}", row.len())));
            continue;
        }
        let mut finite = true;
        for (j, &s) in row.iter().enumerate() {
            if !s.is_finite() {
                finite = false;
                errors.push(Violation::at_cell(i, j, format!("row {i} column {j} is not finite")));
            }
        }
        if finite && raw.score_kind == ScoreKind::LogProbability {
            let mass: f64 = row.iter().map(|s| s.exp()).sum();
            if (mass - 1.0).abs() > NORMALIZATION_TOLERANCE {
                errors.push(Violation::at_row(
                    i,
                    format!("row {i} is not normalized: probabilities sum to {mass}"),
                ));
            }
        }
    }

    if !errors.is_empty() {
        return Err(Violations(errors));
    }
    Ok(Instance {
        num_photos: n,
        num_locations: m,
        true_location: raw.true_location,
        score_kind: raw.score_kind,
        photo_ids: raw.photo_ids,
        scores: raw.scores.into_iter().flatten().collect(),
        metadata: raw.metadata,
    })
}

impl TryFrom<RawInstance> for Instance {
    type Error = Violations;

    fn try_from(raw: RawInstance) -> std::result::Result<Self, Self::Error> {
        validate_instance(raw)
    }
}

impl From<Instance> for RawInstance {
    fn from(inst: Instance) -> Self {
        let scores = inst.scores.chunks(inst.num_locations).map(<[f64]>::to_vec).collect();
        RawInstance {
            num_photos: inst.num_photos,
            num_locations: inst.num_locations,
            true_location: inst.true_location,
            score_kind: inst.score_kind,
            photo_ids: inst.photo_ids,
            scores,
            metadata: inst.metadata,
        }
    }
}

impl Instance {
    /// Builds and validates an instance with default photo ids `p0..p{N-1}`.
    pub fn from_rows(
        rows: Vec<Vec<f64>>,
        true_location: usize,
        score_kind: ScoreKind,
    ) -> Result<Self> {
        let num_photos = rows.len();
        let num_locations = rows.first().map_or(0, Vec::len);
        let raw = RawInstance {
            num_photos,
            num_locations,
            true_location,
            score_kind,
            photo_ids: (0..num_photos).map(|i| format!("p{i}")).collect(),
            scores: rows,
            metadata: None,
        };
        validate_instance(raw).map_err(Error::InvalidInstance)
    }

    /// Parses canonical JSON and validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(text)?;
        validate_instance(raw).map_err(Error::InvalidInstance)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization is infallible")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization is infallible")
    }

    pub fn num_photos(&self) -> usize {
        self.num_photos
    }

    pub fn num_locations(&self) -> usize {
        self.num_locations
    }

    pub fn true_location(&self) -> usize {
        self.true_location
    }

    pub fn score_kind(&self) -> ScoreKind {
        self.score_kind
    }

    pub fn photo_ids(&self) -> &[String] {
        &self.photo_ids
    }

    pub fn metadata(&self) -> Option<&Value> {
        self.metadata.as_ref()
    }

    pub fn with_metadata(mut self, metadata: Value) -> Self {
        self.metadata = Some(metadata);
        self
    }

    pub fn row(&self, photo: usize) -> &[f64] {
        let m = self.num_locations;
        &self.scores[photo * m..(photo + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.scores.chunks(self.num_locations)
    }

    pub fn score(&self, photo: usize, location: usize) -> f64 {
        self.scores[photo * self.num_locations + location]
    }

    /// `S_i^t`, the photo's score for the true location.
    pub fn true_score(&self, photo: usize) -> f64 {
        self.score(photo, self.true_location)
    }

    /// Locations other than the true one, ascending.
    pub fn rivals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_locations).filter(move |&j| j != self.true_location)
    }

    pub fn photo_index(&self, id: &str) -> Option<usize> {
        self.photo_ids.iter().position(|p| p == id)
    }

    /// Maps photo ids to indices, failing on the first unknown id.
    pub fn resolve_ids<S: AsRef<str>>(&self, ids: &[S]) -> std::result::Result<Vec<usize>, String> {
        let lookup: HashMap<&str, usize> =
            self.photo_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        ids.iter()
            .map(|id| {
                lookup.get(id.as_ref()).copied().ok_or_else(|| format!("unknown photo id {:?}", id.as_ref()))
            })
            .collect()
    }

    /// Converts an index set into a membership mask.
    pub fn mask_of(&self, indices: &[usize]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.num_photos];
        for &i in indices {
            if i >= self.num_photos {
                return Err(Error::PhotoOutOfRange { index: i, num_photos: self.num_photos });
            }
            mask[i] = true;
        }
        Ok(mask)
    }

    fn with_scores(&self, scores: Vec<f64>, score_kind: ScoreKind) -> Self {
        Self { scores, score_kind, ..self.clone() }
    }
}

/// The single tie rule: a rival location counts against the true location
/// whenever its collection score is at least as high.
#[inline]
pub fn outranks(rival: f64, truth: f64) -> bool {
    rival >= truth
}

/// Component-wise sum of the score rows of the kept photos.
pub fn aggregate_scores(instance: &Instance, kept: &[usize]) -> Result<Vec<f64>> {
    let mask = instance.mask_of(kept)?;
    aggregate_mask(instance, &mask)
}

/// [`aggregate_scores`] over a membership mask of length `N`.
pub fn aggregate_mask(instance: &Instance, kept: &[bool]) -> Result<Vec<f64>> {
    debug_assert_eq!(kept.len(), instance.num_photos());
    if !kept.iter().any(|&k| k) {
        return Err(Error::EmptyCollection);
    }
    let mut acc = vec![0.0; instance.num_locations()];
    for (row, _) in instance.rows().zip(kept).filter(|(_, &k)| k) {
        for (a, s) in acc.iter_mut().zip(row) {
            *a += s;
        }
    }
    Ok(acc)
}

/// Column sum of one location over the kept photos. Bit-identical to the
/// corresponding entry of [`aggregate_mask`].
pub fn column_sum(instance: &Instance, kept: &[bool], location: usize) -> f64 {
    let mut acc = 0.0;
    for (i, _) in kept.iter().enumerate().filter(|(_, &k)| k) {
        acc += instance.score(i, location);
    }
    acc
}

/// Whether `rival` outranks the true location on the kept photos.
pub fn rival_outranks(instance: &Instance, kept: &[bool], rival: usize) -> bool {
    let t = instance.true_location();
    outranks(column_sum(instance, kept, rival), column_sum(instance, kept, t))
}

/// Normalized collection posterior `exp(S) / sum(exp(S))`, computed with the
/// maximum subtracted first.
pub fn collection_posterior(instance: &Instance, kept: &[usize]) -> Result<Vec<f64>> {
    if instance.score_kind() == ScoreKind::Raw {
        return Err(Error::PosteriorUndefined);
    }
    let scores = aggregate_scores(instance, kept)?;
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Locations other than `t` whose score is at least `scores[t]`.
pub fn higher_set(scores: &[f64], t: usize) -> Vec<usize> {
    let truth = scores[t];
    scores
        .iter()
        .enumerate()
        .filter(|&(j, &s)| j != t && outranks(s, truth))
        .map(|(j, _)| j)
        .collect()
}

/// `|higher_set|` without allocating.
pub fn rival_count(scores: &[f64], t: usize) -> usize {
    let truth = scores[t];
    scores.iter().enumerate().filter(|&(j, &s)| j != t && outranks(s, truth)).count()
}

/// Number of locations ranked at or above the true location once only the
/// `kept` photos remain.
pub fn protected_k(instance: &Instance, kept: &[usize]) -> Result<usize> {
    let mask = instance.mask_of(kept)?;
    protected_k_mask(instance, &mask)
}

pub fn protected_k_mask(instance: &Instance, kept: &[bool]) -> Result<usize> {
    let scores = aggregate_mask(instance, kept)?;
    Ok(rival_count(&scores, instance.true_location()))
}

/// Adds `theta` to the true-location column of every row. The result is
/// tagged as raw scores since rows are no longer normalized.
pub fn apply_margin(instance: &Instance, theta: f64) -> Result<Instance> {
    if !theta.is_finite() || theta < 0.0 {
        return Err(Error::InvalidMargin(theta));
    }
    if theta == 0.0 {
        return Ok(instance.clone());
    }
    let m = instance.num_locations();
    let t = instance.true_location();
    let mut scores = instance.scores.clone();
    for row in scores.chunks_mut(m) {
        row[t] += theta;
    }
    Ok(instance.with_scores(scores, ScoreKind::Raw))
}
