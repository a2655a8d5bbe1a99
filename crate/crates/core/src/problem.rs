//! Problem variants and deletion plans.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{apply_margin, protected_k_mask, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Variant {
    /// Fewest deletions such that at least `k` rivals outrank the true location.
    TopKGuarantee { k: usize },
    /// Most rivals outranking the true location with at most `d` deletions.
    FixedBudget { d: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(flatten)]
    pub variant: Variant,
    /// Photos the user pinned; never deleted. Sorted, no duplicates.
    #[serde(default)]
    pub keep_set: Vec<usize>,
    #[serde(default)]
    pub margin: f64,
}

impl ProblemSpec {
    pub fn top_k(k: usize) -> Self {
        Self { variant: Variant::TopKGuarantee { k }, keep_set: Vec::new(), margin: 0.0 }
    }

    pub fn budget(d: usize) -> Self {
        Self { variant: Variant::FixedBudget { d }, keep_set: Vec::new(), margin: 0.0 }
    }

    pub fn with_keep(mut self, mut keep: Vec<usize>) -> Self {
        keep.sort_unstable();
        keep.dedup();
        self.keep_set = keep;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn validate(&self, instance: &Instance) -> Result<()> {
        let n = instance.num_photos();
        let m = instance.num_locations();
        match self.variant {
            Variant::TopKGuarantee { k } if k == 0 || k > m - 1 => {
                return Err(Error::InvalidSpec(format!("k must be in 1..={}, got {k}", m - 1)));
            }
            Variant::FixedBudget { d } if d > n - 1 => {
                return Err(Error::InvalidSpec(format!("d must be in 0..={}, got {d}", n - 1)));
            }
            _ => {}
        }
        if let Some(&i) = self.keep_set.iter().find(|&&i| i >= n) {
            return Err(Error::PhotoOutOfRange { index: i, num_photos: n });
        }
        if !self.margin.is_finite() || self.margin < 0.0 {
            return Err(Error::InvalidMargin(self.margin));
        }
        Ok(())
    }

    pub fn keep_mask(&self, instance: &Instance) -> Vec<bool> {
        let mut mask = vec![false; instance.num_photos()];
        for &i in &self.keep_set {
            mask[i] = true;
        }
        mask
    }

    /// The instance with the margin folded into the true-location column;
    /// every solver works on this.
    pub fn effective_instance(&self, instance: &Instance) -> Result<Instance> {
        apply_margin(instance, self.margin)
    }

    /// Whether the plan meets the variant's constraint and respects the pins.
    pub fn is_satisfied_by(&self, plan: &DeletionPlan) -> bool {
        let pins_ok = self.keep_set.iter().all(|i| plan.deleted.binary_search(i).is_err());
        let constraint_ok = match self.variant {
            Variant::TopKGuarantee { k } => plan.protected_k >= k,
            Variant::FixedBudget { d } => plan.deleted.len() <= d,
        };
        pins_ok && constraint_ok
    }

    /// The maximized quantity: kept photos for the top-k guarantee,
    /// protected-k for the fixed budget.
    pub fn objective(&self, plan: &DeletionPlan) -> usize {
        match self.variant {
            Variant::TopKGuarantee { .. } => plan.kept.len(),
            Variant::FixedBudget { .. } => plan.protected_k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Optimal,
    Feasible,
    Infeasible,
    /// A search cap was hit before any feasible plan was found.
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeletionPlan {
    /// Deleted photo indices, ascending.
    pub deleted: Vec<usize>,
    /// Kept photo indices, ascending. Never empty.
    pub kept: Vec<usize>,
    pub protected_k: usize,
    pub status: PlanStatus,
}

impl DeletionPlan {
    /// Builds a plan from a kept mask, recomputing protected-k.
    pub fn from_kept_mask(instance: &Instance, kept: &[bool], status: PlanStatus) -> Result<Self> {
        let protected_k = protected_k_mask(instance, kept)?;
        let (kept_idx, deleted_idx): (Vec<usize>, Vec<usize>) =
            (0..instance.num_photos()).partition(|&i| kept[i]);
        Ok(Self { deleted: deleted_idx, kept: kept_idx, protected_k, status })
    }

    pub fn from_deleted(instance: &Instance, deleted: &[usize], status: PlanStatus) -> Result<Self> {
        let mut kept = vec![true; instance.num_photos()];
        for &i in deleted {
            if i >= instance.num_photos() {
                return Err(Error::PhotoOutOfRange { index: i, num_photos: instance.num_photos() });
            }
            kept[i] = false;
        }
        Self::from_kept_mask(instance, &kept, status)
    }

    /// The plan that deletes nothing.
    pub fn keep_all(instance: &Instance, status: PlanStatus) -> Self {
        Self::from_kept_mask(instance, &vec![true; instance.num_photos()], status)
            .expect("instances have at least one photo")
    }

    pub fn num_deleted(&self) -> usize {
        self.deleted.len()
    }

    pub fn kept_mask(&self, num_photos: usize) -> Vec<bool> {
        let mut mask = vec![false; num_photos];
        for &i in &self.kept {
            mask[i] = true;
        }
        mask
    }

    pub fn with_status(mut self, status: PlanStatus) -> Self {
        self.status = status;
        self
    }

    pub fn deleted_ids<'a>(&self, instance: &'a Instance) -> Vec<&'a str> {
        self.deleted.iter().map(|&i| instance.photo_ids()[i].as_str()).collect()
    }
}
