use crate::error::{Error, Result};
use crate::model::{apply_margin, Instance};
use crate::top1::slack;

/// Per-rival contribution tables `c_i = S_i^j - S_i^t` over an instance
/// whose margin is already applied.
///
/// Undecided photos are always a suffix of a fixed branching order, so each
/// rival keeps its negative contributions sorted once, tagged with their
/// position in that order; a node at depth `p` only looks at entries whose
/// position is at least `p`.
pub(crate) struct RivalTables {
    n: usize,
    pub(crate) rivals: Vec<usize>,
    contrib: Vec<f64>,
    total: Vec<f64>,
    tol: Vec<f64>,
    negatives: Vec<Vec<(usize, f64)>>,
}

impl RivalTables {
    pub(crate) fn new(eff: &Instance, order: &[usize]) -> Self {
        let n = eff.num_photos();
        let t = eff.true_location();
        let rivals: Vec<usize> = eff.rivals().collect();
        let mut contrib = Vec::with_capacity(rivals.len() * n);
        for &j in &rivals {
            contrib.extend((0..n).map(|i| eff.score(i, j) - eff.score(i, t)));
        }
        let rows: Vec<&[f64]> = contrib.chunks(n.max(1)).collect();
        let total = rows.iter().map(|r| r.iter().sum()).collect();
        let tol = rows.iter().map(|r| slack(r.iter().copied())).collect();
        let negatives = rows
            .iter()
            .map(|r| {
                let mut neg: Vec<(usize, f64)> = order
                    .iter()
                    .enumerate()
                    .filter(|&(_, &i)| r[i] < 0.0)
                    .map(|(pos, &i)| (pos, r[i]))
                    .collect();
                neg.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
                neg
            })
            .collect();
        Self { n, rivals, contrib, total, tol, negatives }
    }

    pub(crate) fn num_rivals(&self) -> usize {
        self.rivals.len()
    }

    fn c(&self, r: usize, photo: usize) -> f64 {
        self.contrib[r * self.n + photo]
    }

    /// Difference-space sum with only `deleted` removed.
    pub(crate) fn base(&self, r: usize, deleted: &[usize]) -> f64 {
        deleted.iter().fold(self.total[r], |acc, &i| acc - self.c(r, i))
    }

    /// Whether deleting at most `budget` undecided photos can lift rival `r`
    /// to the true location, ignoring every other rival.
    pub(crate) fn reachable_within(&self, r: usize, base: f64, depth: usize, budget: usize) -> bool {
        let tol = self.tol[r];
        if base >= -tol {
            return true;
        }
        let mut sum = base;
        for &(_, c) in self.negatives[r].iter().filter(|(pos, _)| *pos >= depth).take(budget) {
            sum -= c;
            if sum >= -tol {
                return true;
            }
        }
        false
    }

    /// Fewest undecided deletions lifting rival `r` to the true location,
    /// or `None` if more than `limit` are needed.
    pub(crate) fn extra_needed(&self, r: usize, base: f64, depth: usize, limit: usize) -> Option<usize> {
        let tol = self.tol[r];
        if base >= -tol {
            return Some(0);
        }
        let mut sum = base;
        for (m, &(_, c)) in self.negatives[r].iter().filter(|(pos, _)| *pos >= depth).take(limit).enumerate() {
            sum -= c;
            if sum >= -tol {
                return Some(m + 1);
            }
        }
        None
    }
}

/// Upper bound on protected-k over every completion of a partial decision:
/// counts rivals that could individually reach the true location by
/// deleting at most `remaining_budget` free photos, most negative
/// contributions first.
pub fn location_bound(
    instance: &Instance,
    forced_kept: &[usize],
    forced_deleted: &[usize],
    remaining_budget: usize,
    theta: f64,
) -> Result<usize> {
    let kept = instance.mask_of(forced_kept)?;
    let deleted = instance.mask_of(forced_deleted)?;
    if let Some(i) = (0..instance.num_photos()).find(|&i| kept[i] && deleted[i]) {
        return Err(Error::InvalidSpec(format!("photo {i} is both forced kept and forced deleted")));
    }
    let eff = apply_margin(instance, theta)?;
    let free: Vec<usize> = (0..instance.num_photos()).filter(|&i| !kept[i] && !deleted[i]).collect();
    let tables = RivalTables::new(&eff, &free);
    let forced: Vec<usize> = (0..instance.num_photos()).filter(|&i| deleted[i]).collect();
    Ok((0..tables.num_rivals())
        .filter(|&r| tables.reachable_within(r, tables.base(r, &forced), 0, remaining_budget))
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::gen_random;
    use crate::model::fixtures::inst_a;
    use crate::model::protected_k_mask;

    #[test]
    fn root_of_inst_a() {
        assert_eq!(location_bound(&inst_a(), &[], &[], 2, 0.0).unwrap(), 2);
        assert_eq!(location_bound(&inst_a(), &[], &[], 0, 0.0).unwrap(), 0);
        assert!(location_bound(&inst_a(), &[0], &[0], 1, 0.0).is_err());
    }

    #[test]
    fn zero_budget_equals_current_protected_k() {
        for seed in 0..50 {
            let inst = gen_random(9, 5, 0.3, seed).unwrap();
            let deleted = [seed as usize % 9];
            let mut kept = vec![true; 9];
            kept[deleted[0]] = false;
            let pk = protected_k_mask(&inst, &kept).unwrap();
            assert_eq!(location_bound(&inst, &[], &deleted, 0, 0.0).unwrap(), pk);
        }
    }

    #[test]
    fn satisfied_rival_always_counted() {
        // rival 0 already beats the truth with every photo kept
        let inst = crate::model::Instance::from_rows(
            vec![vec![3.0, -9.0, 0.0], vec![1.0, -9.0, 0.0]],
            2,
            crate::model::ScoreKind::Raw,
        )
        .unwrap();
        for budget in 0..2 {
            assert!(location_bound(&inst, &[0, 1], &[], budget, 0.0).unwrap() >= 1);
        }
    }
}
