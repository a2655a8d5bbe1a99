//! Primal heuristics used to seed the branch-and-bound incumbent.

use crate::model::{protected_k_mask, rival_outranks, Instance};
use crate::top1::extra_prefix;

/// Repeatedly lets the cheapest rival that does not yet reach the true
/// location catch up, as long as its extra deletions fit in `budget`. Stops
/// once `target` rivals outrank the truth. Returns the kept mask.
pub(crate) fn rival_sweep(eff: &Instance, pinned: &[bool], target: usize, budget: usize) -> Vec<bool> {
    let n = eff.num_photos();
    let mut kept = vec![true; n];
    let mut used = 0;
    while protected_k_mask(eff, &kept).expect("sweep keeps a photo") < target {
        let cheapest = eff
            .rivals()
            .filter(|&j| !rival_outranks(eff, &kept, j))
            .filter_map(|j| extra_prefix(eff, j, pinned, &kept, budget - used))
            .min_by_key(Vec::len);
        let Some(extra) = cheapest else { break };
        used += extra.len();
        for i in extra {
            kept[i] = false;
        }
    }
    kept
}

/// Puts deleted photos back, lowest true-location score first, whenever
/// the collection still has at least `k` rivals at or above the truth.
pub(crate) fn restore_unneeded(eff: &Instance, kept: &mut [bool], k: usize) {
    let mut deleted: Vec<usize> = (0..eff.num_photos()).filter(|&i| !kept[i]).collect();
    deleted.sort_by(|&a, &b| eff.true_score(a).total_cmp(&eff.true_score(b)).then(a.cmp(&b)));
    for i in deleted {
        kept[i] = true;
        if protected_k_mask(eff, kept).expect("restoring keeps a photo") < k {
            kept[i] = false;
        }
    }
}
