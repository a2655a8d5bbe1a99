use std::time::Instant;

use itertools::Itertools;

use super::SolveReport;
use crate::error::{Error, Result};
use crate::model::protected_k_mask;
use crate::model::Instance;
use crate::problem::{DeletionPlan, PlanStatus, ProblemSpec, Variant};

pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Enumerates every deletion set outside the keep-set, by size and then
/// lexicographically.
///
/// Top-k guarantee: the first feasible set in that order (fewest
/// deletions, lexicographically smallest). Fixed budget: the highest
/// protected-k with at most `d` deletions, ties to fewer deletions and then
/// the lexicographically smallest set.
pub fn brute_force(instance: &Instance, spec: &ProblemSpec) -> Result<SolveReport> {
    spec.validate(instance)?;
    let n = instance.num_photos();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { num_photos: n, limit: BRUTE_FORCE_LIMIT });
    }
    let start = Instant::now();
    let eff = spec.effective_instance(instance)?;
    let pinned = spec.keep_mask(instance);
    let free: Vec<usize> = (0..n).filter(|&i| !pinned[i]).collect();
    let max_deletions = free.len().min(n - 1);
    let mut evaluated = 0u64;

    let mut evaluate = |deleted: &[usize]| -> (Vec<bool>, usize) {
        evaluated += 1;
        let mut kept = vec![true; n];
        for &i in deleted {
            kept[i] = false;
        }
        let pk = protected_k_mask(&eff, &kept).expect("at least one photo kept");
        (kept, pk)
    };

    let best: Option<Vec<bool>> = match spec.variant {
        Variant::TopKGuarantee { k } => (0..=max_deletions).find_map(|size| {
            free.iter().copied().combinations(size).find_map(|deleted| {
                let (kept, pk) = evaluate(&deleted);
                (pk >= k).then_some(kept)
            })
        }),
        Variant::FixedBudget { d } => {
            let ceiling = eff.num_locations() - 1;
            let mut best: Option<(usize, Vec<bool>)> = None;
            'sizes: for size in 0..=d.min(max_deletions) {
                for deleted in free.iter().copied().combinations(size) {
                    let (kept, pk) = evaluate(&deleted);
                    if best.as_ref().is_none_or(|(b, _)| pk > *b) {
                        best = Some((pk, kept));
                        if pk == ceiling {
                            break 'sizes;
                        }
                    }
                }
            }
            best.map(|(_, kept)| kept)
        }
    };

    let plan = match best {
        Some(kept) => DeletionPlan::from_kept_mask(&eff, &kept, PlanStatus::Optimal)?,
        None => DeletionPlan::keep_all(&eff, PlanStatus::Infeasible),
    };
    let best_bound = if plan.status == PlanStatus::Infeasible { 0.0 } else { spec.objective(&plan) as f64 };
    Ok(SolveReport {
        plan,
        proved_optimal: true,
        nodes_explored: evaluated,
        best_bound,
        wall_time: start.elapsed(),
        bound_trace: None,
    })
}
