//! Exact solvers: exhaustive enumeration for tiny instances and a
//! best-first branch-and-bound over keep/delete decisions.

mod bnb;
mod bound;
mod brute;
mod heuristic;

use std::time::Duration;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::DeletionPlan;

pub use bnb::solve_bnb;
pub use bound::location_bound;
pub use brute::{brute_force, BRUTE_FORCE_LIMIT};

/// Search caps. Hitting one is reported through
/// [`SolveReport::proved_optimal`], never silently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub node_cap: u64,
    pub time_cap: Duration,
    /// Record `(node, bound)` pairs whenever the best open bound changes.
    pub trace: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Self { node_cap: 10_000_000, time_cap: Duration::from_secs(300), trace: false }
    }
}

impl Limits {
    pub fn with_time_cap(mut self, time_cap: Duration) -> Self {
        self.time_cap = time_cap;
        self
    }

    pub fn with_node_cap(mut self, node_cap: u64) -> Self {
        self.node_cap = node_cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_cap == 0 {
            return Err(Error::InvalidLimits("node cap must be positive".into()));
        }
        if self.time_cap.is_zero() {
            return Err(Error::InvalidLimits("time cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub plan: DeletionPlan,
    pub proved_optimal: bool,
    pub nodes_explored: u64,
    /// Upper bound on the maximized objective (kept photos for the top-k
    /// guarantee, protected-k for the fixed budget). Zero when no feasible
    /// plan exists.
    pub best_bound: f64,
    /// Excluded from serialization so that reports compare byte-for-byte.
    #[serde(skip)]
    pub wall_time: Duration,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_trace: Option<Vec<(u64, f64)>>,
}
