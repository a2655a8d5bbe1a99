//! Greedy baseline: delete photos with the highest true-location score first.

use crate::error::{Error, Result};
use crate::model::{protected_k_mask, Instance};
use crate::problem::{DeletionPlan, PlanStatus};

/// Deletable photos in greedy order: descending `S_i^t`, ties by index.
pub fn greedy_order(instance: &Instance, keep_set: &[usize]) -> Result<Vec<usize>> {
    let pinned = instance.mask_of(keep_set)?;
    let mut order: Vec<usize> = (0..instance.num_photos()).filter(|&i| !pinned[i]).collect();
    order.sort_by(|&a, &b| {
        instance.true_score(b).total_cmp(&instance.true_score(a)).then(a.cmp(&b))
    });
    Ok(order)
}

/// Deletes in greedy order until at least `k` rivals outrank the true
/// location. Infeasible when the deletable photos (or all but one photo)
/// run out first.
pub fn greedy_topk(instance: &Instance, k: usize, keep_set: &[usize]) -> Result<DeletionPlan> {
    let m = instance.num_locations();
    if k == 0 || k > m - 1 {
        return Err(Error::InvalidSpec(format!("k must be in 1..={}, got {k}", m - 1)));
    }
    let order = greedy_order(instance, keep_set)?;
    let mut kept = vec![true; instance.num_photos()];
    let mut remaining = instance.num_photos();
    if protected_k_mask(instance, &kept)? >= k {
        return DeletionPlan::from_kept_mask(instance, &kept, PlanStatus::Feasible);
    }
    for photo in order {
        if remaining == 1 {
            break;
        }
        kept[photo] = false;
        remaining -= 1;
        if protected_k_mask(instance, &kept)? >= k {
            return DeletionPlan::from_kept_mask(instance, &kept, PlanStatus::Feasible);
        }
    }
    DeletionPlan::from_kept_mask(instance, &kept, PlanStatus::Infeasible)
}

/// Deletes the `d` deletable photos with the highest true-location score.
pub fn greedy_budget(instance: &Instance, d: usize, keep_set: &[usize]) -> Result<DeletionPlan> {
    let n = instance.num_photos();
    if d > n - 1 {
        return Err(Error::InvalidSpec(format!("d must be in 0..={}, got {d}", n - 1)));
    }
    let order = greedy_order(instance, keep_set)?;
    let mut kept = vec![true; n];
    for &photo in order.iter().take(d.min(n - 1)) {
        kept[photo] = false;
    }
    DeletionPlan::from_kept_mask(instance, &kept, PlanStatus::Feasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::gen_observation1;
    use crate::model::fixtures::inst_a;

    #[test]
    fn topk_on_inst_a_breaks_ties_by_index() {
        let plan = greedy_topk(&inst_a(), 1, &[]).unwrap();
        assert_eq!(plan.deleted, vec![0]);
        assert_eq!(plan.protected_k, 1);
        assert_eq!(plan.status, PlanStatus::Feasible);
    }

    #[test]
    fn topk_vacuous_when_already_private() {
        // kept {X3} alone already has protected-k 2
        let inst = crate::model::Instance::from_rows(
            vec![vec![2.0, 2.0, 0.0]],
            2,
            crate::model::ScoreKind::Raw,
        )
        .unwrap();
        let plan = greedy_topk(&inst, 2, &[]).unwrap();
        assert!(plan.deleted.is_empty());
        assert_eq!(plan.status, PlanStatus::Feasible);
    }

    #[test]
    fn topk_observation1_small() {
        let inst = gen_observation1(1, 0.1).unwrap();
        let plan = greedy_topk(&inst, 2, &[]).unwrap();
        assert_eq!(plan.deleted, vec![0, 1, 2]);
        assert_eq!(plan.protected_k, 2);
    }

    #[test]
    fn topk_infeasible_when_pins_block() {
        let plan = greedy_topk(&inst_a(), 1, &[0, 1]).unwrap();
        assert_eq!(plan.status, PlanStatus::Infeasible);
        assert_eq!(plan.deleted, vec![2]);
        assert!(greedy_topk(&inst_a(), 3, &[]).is_err());
    }

    #[test]
    fn budget_examples() {
        let a = inst_a();
        let plan = greedy_budget(&a, 2, &[]).unwrap();
        assert_eq!(plan.deleted, vec![0, 1]);
        assert_eq!(plan.protected_k, 2);
        let none = greedy_budget(&a, 0, &[]).unwrap();
        assert!(none.deleted.is_empty());
        assert_eq!(none.protected_k, 0);
        assert!(greedy_budget(&a, 3, &[]).is_err());

        let obs = gen_observation1(5, 0.1).unwrap();
        let plan = greedy_budget(&obs, 5, &[]).unwrap();
        assert_eq!(plan.deleted, vec![0, 1, 2, 3, 4]);
        assert_eq!(plan.protected_k, 0);
    }

    #[test]
    fn budget_sets_are_nested() {
        let inst = crate::gen::gen_random(12, 5, 0.5, 7).unwrap();
        let mut prev: Vec<usize> = Vec::new();
        for d in 0..12 {
            let plan = greedy_budget(&inst, d, &[3]).unwrap();
            assert!(prev.iter().all(|i| plan.deleted.contains(i)));
            assert!(!plan.deleted.contains(&3));
            prev = plan.deleted;
        }
    }
}
