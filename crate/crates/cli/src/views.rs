//! JSON shapes shared by the CLI and the HTTP service.

use geopriv_core::model::{aggregate_mask, apply_margin, protected_k_mask};
use geopriv_core::{DeletionPlan, Instance, PlanStatus, ProblemSpec, SolveReport};
use serde::{Deserialize, Serialize};

/// Maximum number of locations listed in ranked views.
pub const TOP_LOCATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Topk,
    Budget,
}

/// A problem as written by a user: photo ids instead of indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInput {
    pub variant: VariantName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default)]
    pub margin: f64,
    #[serde(default)]
    pub keep_set: Vec<String>,
}

impl ProblemInput {
    /// Resolves ids and checks the spec against `instance`.
    pub fn to_spec(&self, instance: &Instance) -> Result<ProblemSpec, String> {
        let spec = match (self.variant, self.k, self.d) {
            (VariantName::Topk, Some(k), None) => ProblemSpec::top_k(k),
            (VariantName::Budget, None, Some(d)) => ProblemSpec::budget(d),
            (VariantName::Topk, _, _) => return Err("variant topk needs k and no d".into()),
            (VariantName::Budget, _, _) => return Err("variant budget needs d and no k".into()),
        };
        let keep = instance.resolve_ids(&self.keep_set)?;
        let spec = spec.with_keep(keep).with_margin(self.margin);
        spec.validate(instance).map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanView {
    pub deleted: Vec<String>,
    pub deleted_indices: Vec<usize>,
    pub num_kept: usize,
    /// On the margin-applied scores the solver optimized.
    pub protected_k: usize,
    /// On the scores as given.
    pub protected_k_unmargined: usize,
    pub status: PlanStatus,
}

impl PlanView {
    pub fn new(instance: &Instance, plan: &DeletionPlan) -> Self {
        let kept = plan.kept_mask(instance.num_photos());
        Self {
            deleted: plan.deleted_ids(instance).into_iter().map(str::to_string).collect(),
            deleted_indices: plan.deleted.clone(),
            num_kept: plan.kept.len(),
            protected_k: plan.protected_k,
            protected_k_unmargined: protected_k_mask(instance, &kept).expect("plans keep a photo"),
            status: plan.status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportView {
    pub solver: String,
    pub proved_optimal: bool,
    pub nodes_explored: u64,
    pub best_bound: f64,
}

impl ReportView {
    pub fn new(solver: &str, report: &SolveReport) -> Self {
        Self {
            solver: solver.to_string(),
            proved_optimal: report.proved_optimal,
            nodes_explored: report.nodes_explored,
            best_bound: report.best_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedLocation {
    pub location: usize,
    pub score: f64,
    pub is_true: bool,
}

/// Locations of the kept collection by descending score, ties by index.
pub fn ranked_locations(instance: &Instance, kept: &[bool], limit: usize) -> Vec<RankedLocation> {
    let scores = aggregate_mask(instance, kept).expect("kept set is non-empty");
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(limit)
        .map(|j| RankedLocation { location: j, score: scores[j], is_true: j == instance.true_location() })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotoView {
    pub id: String,
    pub true_score: f64,
}

pub fn photo_views(instance: &Instance) -> Vec<PhotoView> {
    (0..instance.num_photos())
        .map(|i| PhotoView { id: instance.photo_ids()[i].clone(), true_score: instance.true_score(i) })
        .collect()
}

/// Protected-k of `kept` after adding `margin`.
pub fn margined_protected_k(instance: &Instance, kept: &[bool], margin: f64) -> geopriv_core::Result<usize> {
    protected_k_mask(&apply_margin(instance, margin)?, kept)
}
