//! Photo-collection geolocation privacy: choose photos to delete so that the
//! summed per-photo location scores no longer rank the true location in the
//! top `k`.
//!
//! The crate provides the shared scoring semantics ([`model`]), a greedy
//! baseline, an exact `O(M N log N)` top-1 solver, an exact
//! branch-and-bound for both problem variants, a MILP encoding with LP
//! export, and instance generators.

pub mod error;
pub mod exact;
pub mod gen;
pub mod greedy;
pub mod milp;
pub mod model;
pub mod problem;
pub mod solve;
pub mod top1;

pub use error::{Error, Result};
pub use exact::{brute_force, location_bound, solve_bnb, Limits, SolveReport};
pub use gen::{gen_knapsack_reduction, gen_observation1, gen_proxy, gen_random, KnapsackParams};
pub use greedy::{greedy_budget, greedy_topk};
pub use milp::{build_milp, decode_solution, export_lp, LinearModel};
pub use model::{
    aggregate_scores, apply_margin, collection_posterior, higher_set, protected_k, validate_instance, Instance,
    RawInstance, ScoreKind,
};
pub use problem::{DeletionPlan, PlanStatus, ProblemSpec, Variant};
pub use solve::{solve, SolverKind};
pub use top1::{min_deletions_vs_location, top1_exact};
