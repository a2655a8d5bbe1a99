//! One entry point over every solver, shared by the CLI and the service.

use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{brute_force, solve_bnb, Limits, SolveReport};
use crate::greedy::{greedy_budget, greedy_topk};
use crate::model::Instance;
use crate::problem::{PlanStatus, ProblemSpec, Variant};
use crate::top1::top1_exact;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Exact,
    Greedy,
    Top1,
    BruteForce,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Greedy => "greedy",
            SolverKind::Top1 => "top1",
            SolverKind::BruteForce => "brute_force",
        }
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exact" | "bnb" => Ok(SolverKind::Exact),
            "greedy" => Ok(SolverKind::Greedy),
            "top1" => Ok(SolverKind::Top1),
            "brute" | "brute_force" | "brute-force" => Ok(SolverKind::BruteForce),
            other => Err(format!("unknown solver {other:?} (expected exact, greedy, top1 or brute)")),
        }
    }
}

/// Runs `solver` on `spec`. The margin is applied here for the heuristics
/// and inside the exact solvers, so every path ranks the same scores.
pub fn solve(instance: &Instance, spec: &ProblemSpec, solver: SolverKind, limits: Limits) -> Result<SolveReport> {
    spec.validate(instance)?;
    match solver {
        SolverKind::Exact => solve_bnb(instance, spec, limits),
        SolverKind::BruteForce => brute_force(instance, spec),
        SolverKind::Greedy => {
            let start = Instant::now();
            let eff = spec.effective_instance(instance)?;
            let (plan, trivial_bound) = match spec.variant {
                Variant::TopKGuarantee { k } => (greedy_topk(&eff, k, &spec.keep_set)?, instance.num_photos()),
                Variant::FixedBudget { d } => (greedy_budget(&eff, d, &spec.keep_set)?, instance.num_locations() - 1),
            };
            Ok(SolveReport {
                plan,
                proved_optimal: false,
                nodes_explored: 0,
                best_bound: trivial_bound as f64,
                wall_time: start.elapsed(),
                bound_trace: None,
            })
        }
        SolverKind::Top1 => {
            if spec.variant != (Variant::TopKGuarantee { k: 1 }) {
                return Err(Error::UnsupportedSolver { solver: "top1", problem: format!("{:?}", spec.variant) });
            }
            let start = Instant::now();
            let eff = spec.effective_instance(instance)?;
            let plan = top1_exact(&eff, &spec.keep_set)?;
            let best_bound = if plan.status == PlanStatus::Infeasible { 0.0 } else { plan.kept.len() as f64 };
            Ok(SolveReport {
                plan,
                proved_optimal: true,
                nodes_explored: 0,
                best_bound,
                wall_time: start.elapsed(),
                bound_trace: None,
            })
        }
    }
}
