//! Exact top-1 guarantee in `O(M N log N)`.
//!
//! For a fixed rival `j` the fewest deletions that let `j` reach the true
//! location is a prefix of the deletable photos sorted by descending
//! advantage `S_i^t - S_i^j`. Minimizing over rivals solves the top-1
//! problem.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{rival_outranks, Instance};
use crate::problem::{DeletionPlan, PlanStatus};

/// Slack on the difference-space running sum before the exact column-sum
/// test is consulted. Only widens the candidate filter; the decision itself
/// is always the exact rank test.
pub(crate) fn slack(contributions: impl Iterator<Item = f64>) -> f64 {
    1e-9 * (1.0 + contributions.map(f64::abs).sum::<f64>())
}

/// Per-rival outcome: the deletion prefix, or `None` when unreachable.
fn prefix_for_rival(instance: &Instance, rival: usize, pinned: &[bool]) -> Option<Vec<usize>> {
    extra_prefix(instance, rival, pinned, &vec![true; instance.num_photos()], usize::MAX)
}

/// Fewest further deletions from the photos still in `kept` (and not
/// pinned) after which `rival` reaches the true location; `None` when that
/// takes more than `limit` deletions or is impossible.
pub(crate) fn extra_prefix(
    instance: &Instance,
    rival: usize,
    pinned: &[bool],
    kept: &[bool],
    limit: usize,
) -> Option<Vec<usize>> {
    let t = instance.true_location();
    let n = instance.num_photos();
    let advantage = |i: usize| instance.score(i, t) - instance.score(i, rival);

    let mut pool: Vec<usize> = (0..n).filter(|&i| kept[i] && !pinned[i]).collect();
    pool.sort_by(|&a, &b| advantage(b).total_cmp(&advantage(a)).then(a.cmp(&b)));

    // running sum of S_i^j - S_i^t over the kept photos
    let mut gap: f64 = (0..n).filter(|&i| kept[i]).map(|i| -advantage(i)).sum();
    let tol = slack((0..n).map(advantage));
    let mut kept = kept.to_vec();
    let mut remaining = kept.iter().filter(|&&k| k).count();
    let mut deleted = Vec::new();
    let mut next = pool.into_iter();
    loop {
        if gap >= -tol && rival_outranks(instance, &kept, rival) {
            deleted.sort_unstable();
            return Some(deleted);
        }
        let photo = next.next()?;
        if remaining == 1 || advantage(photo) <= 0.0 || deleted.len() == limit {
            return None;
        }
        kept[photo] = false;
        remaining -= 1;
        gap += advantage(photo);
        deleted.push(photo);
    }
}

fn check_rival(instance: &Instance, rival: usize) -> Result<()> {
    if rival >= instance.num_locations() {
        return Err(Error::LocationOutOfRange { index: rival, num_locations: instance.num_locations() });
    }
    if rival == instance.true_location() {
        return Err(Error::TrueLocationAsRival(rival));
    }
    Ok(())
}

/// Fewest deletions outside `keep_set` after which `rival` scores at least
/// as high as the true location.
pub fn min_deletions_vs_location(
    instance: &Instance,
    rival: usize,
    keep_set: &[usize],
) -> Result<DeletionPlan> {
    check_rival(instance, rival)?;
    let pinned = instance.mask_of(keep_set)?;
    match prefix_for_rival(instance, rival, &pinned) {
        Some(deleted) => DeletionPlan::from_deleted(instance, &deleted, PlanStatus::Optimal),
        None => Ok(DeletionPlan::keep_all(instance, PlanStatus::Infeasible)),
    }
}

/// Solution of the top-1 problem together with the rival that achieves it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Top1Solution {
    pub plan: DeletionPlan,
    pub rival: Option<usize>,
}

fn pick_best(candidates: impl Iterator<Item = (usize, Option<Vec<usize>>)>) -> Option<(usize, Vec<usize>)> {
    candidates
        .filter_map(|(j, d)| d.map(|d| (j, d)))
        .min_by(|(ja, da), (jb, db)| da.len().cmp(&db.len()).then(ja.cmp(jb)))
}

fn finish(instance: &Instance, best: Option<(usize, Vec<usize>)>) -> Result<Top1Solution> {
    match best {
        Some((rival, deleted)) => Ok(Top1Solution {
            plan: DeletionPlan::from_deleted(instance, &deleted, PlanStatus::Optimal)?,
            rival: Some(rival),
        }),
        None => Ok(Top1Solution {
            plan: DeletionPlan::keep_all(instance, PlanStatus::Infeasible),
            rival: None,
        }),
    }
}

/// Globally fewest deletions for a top-1 guarantee. Among rivals needing
/// the same number of deletions the lowest location index wins.
pub fn top1_solve(instance: &Instance, keep_set: &[usize]) -> Result<Top1Solution> {
    let pinned = instance.mask_of(keep_set)?;
    let best = pick_best(instance.rivals().map(|j| (j, prefix_for_rival(instance, j, &pinned))));
    finish(instance, best)
}

pub fn top1_exact(instance: &Instance, keep_set: &[usize]) -> Result<DeletionPlan> {
    top1_solve(instance, keep_set).map(|s| s.plan)
}

/// [`top1_solve`] with the per-rival subproblems evaluated on the rayon pool.
/// Returns the same answer as the sequential version.
pub fn top1_solve_par(instance: &Instance, keep_set: &[usize]) -> Result<Top1Solution> {
    let pinned = instance.mask_of(keep_set)?;
    let rivals: Vec<usize> = instance.rivals().collect();
    let outcomes: Vec<(usize, Option<Vec<usize>>)> =
        rivals.par_iter().map(|&j| (j, prefix_for_rival(instance, j, &pinned))).collect();
    finish(instance, pick_best(outcomes.into_iter()))
}
