use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::bound::RivalTables;
use super::heuristic::{restore_unneeded, rival_sweep};
use super::{Limits, SolveReport};
use crate::error::Result;
use crate::greedy::{greedy_budget, greedy_topk};
use crate::model::{protected_k_mask, Instance};
use crate::problem::{DeletionPlan, PlanStatus, ProblemSpec, Variant};
use crate::top1::top1_exact;

/// An open node. Photos `order[..depth]` are decided; `deleted` lists the
/// decided deletions, everything else decided is kept.
#[derive(Debug)]
struct Node {
    bound: usize,
    depth: usize,
    id: u64,
    deleted: Vec<usize>,
}

// Max-heap order: larger bound, then deeper, then older.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

struct Search<'a> {
    eff: &'a Instance,
    variant: Variant,
    order: Vec<usize>,
    tables: RivalTables,
    incumbent: Option<DeletionPlan>,
    scratch: Vec<usize>,
}

impl Search<'_> {
    fn n(&self) -> usize {
        self.eff.num_photos()
    }

    /// Objective of the incumbent in maximization units; 0 without one.
    fn incumbent_value(&self) -> usize {
        match (&self.incumbent, self.variant) {
            (None, _) => 0,
            (Some(p), Variant::TopKGuarantee { .. }) => p.kept.len(),
            (Some(p), Variant::FixedBudget { .. }) => p.protected_k,
        }
    }

    fn improves(&self, value: usize) -> bool {
        self.incumbent.is_none() || value > self.incumbent_value()
    }

    /// Bound in maximization units, or `None` when the subtree cannot beat
    /// the incumbent.
    fn bound(&mut self, depth: usize, deleted: &[usize]) -> Option<usize> {
        let n = self.n();
        match self.variant {
            Variant::TopKGuarantee { k } => {
                // strictly fewer deletions than the incumbent, and one photo kept
                let cap = match &self.incumbent {
                    Some(p) => p.num_deleted(),
                    None => n,
                };
                let limit = cap.checked_sub(deleted.len() + 1)?;
                self.scratch.clear();
                for r in 0..self.tables.num_rivals() {
                    let base = self.tables.base(r, deleted);
                    let extra = self.tables.extra_needed(r, base, depth, limit).unwrap_or(usize::MAX);
                    self.scratch.push(extra);
                }
                let (_, &mut kth, _) = self.scratch.select_nth_unstable(k - 1);
                if kth == usize::MAX {
                    return None;
                }
                let value = n - deleted.len() - kth;
                self.improves(value).then_some(value)
            }
            Variant::FixedBudget { d } => {
                let budget = d - deleted.len();
                let value = (0..self.tables.num_rivals())
                    .filter(|&r| {
                        let base = self.tables.base(r, deleted);
                        self.tables.reachable_within(r, base, depth, budget)
                    })
                    .count();
                self.improves(value).then_some(value)
            }
        }
    }

    /// Scores the completion that keeps every undecided photo.
    fn try_completion(&mut self, deleted: &[usize]) {
        let mut kept = vec![true; self.n()];
        for &i in deleted {
            kept[i] = false;
        }
        let pk = protected_k_mask(self.eff, &kept).expect("nodes keep at least one photo");
        let value = match self.variant {
            Variant::TopKGuarantee { k } if pk >= k => self.n() - deleted.len(),
            Variant::TopKGuarantee { .. } => return,
            Variant::FixedBudget { .. } => pk,
        };
        if self.improves(value) {
            self.incumbent = Some(
                DeletionPlan::from_kept_mask(self.eff, &kept, PlanStatus::Feasible)
                    .expect("nodes keep at least one photo"),
            );
        }
    }

    fn offer(&mut self, plan: DeletionPlan) {
        let feasible = match self.variant {
            Variant::TopKGuarantee { k } => plan.protected_k >= k,
            Variant::FixedBudget { d } => plan.num_deleted() <= d,
        };
        let value = match self.variant {
            Variant::TopKGuarantee { .. } => plan.kept.len(),
            Variant::FixedBudget { .. } => plan.protected_k,
        };
        if feasible && self.improves(value) {
            self.incumbent = Some(plan.with_status(PlanStatus::Feasible));
        }
    }

    fn may_delete_more(&self, deleted: usize) -> bool {
        match self.variant {
            Variant::TopKGuarantee { .. } => self.n() - deleted > 1,
            Variant::FixedBudget { d } => deleted < d,
        }
    }
}

/// Branching key: how decisively the photo favours or disfavours the truth
/// against its strongest rival.
fn branching_order(eff: &Instance, pinned: &[bool]) -> Vec<usize> {
    let t = eff.true_location();
    let key = |i: usize| {
        let best_rival = eff.rivals().map(|j| eff.score(i, j)).fold(f64::NEG_INFINITY, f64::max);
        (eff.score(i, t) - best_rival).abs()
    };
    let mut order: Vec<usize> = (0..eff.num_photos()).filter(|&i| !pinned[i]).collect();
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    order
}

/// Best-first branch-and-bound over keep/delete decisions.
///
/// Greedy, the top-1 solver where it applies, and a rival-by-rival sweep
/// provide the first incumbent. Nodes are ordered by bound, then depth, then creation; the
/// delete child is created before the keep child. The fixed-budget bound is
/// [`super::location_bound`]; the top-k bound is the `k`-th smallest
/// per-rival count of extra deletions. Both relax the coupling between
/// rivals, so neither ever cuts off an optimum.
pub fn solve_bnb(instance: &Instance, spec: &ProblemSpec, limits: Limits) -> Result<SolveReport> {
    spec.validate(instance)?;
    limits.validate()?;
    let start = Instant::now();
    let eff = spec.effective_instance(instance)?;
    let pinned = spec.keep_mask(instance);
    let order = branching_order(&eff, &pinned);
    let tables = RivalTables::new(&eff, &order);
    let mut search = Search {
        eff: &eff,
        variant: spec.variant,
        order,
        tables,
        incumbent: None,
        scratch: Vec::new(),
    };

    match spec.variant {
        Variant::TopKGuarantee { k } => {
            let greedy = greedy_topk(&eff, k, &spec.keep_set)?;
            let mut trimmed = greedy.kept_mask(eff.num_photos());
            search.offer(greedy);
            if k == 1 {
                search.offer(top1_exact(&eff, &spec.keep_set)?);
            }
            let mut swept = rival_sweep(&eff, &pinned, k, eff.num_photos() - 1);
            for kept in [&mut swept, &mut trimmed] {
                restore_unneeded(&eff, kept, k);
                search.offer(DeletionPlan::from_kept_mask(&eff, kept, PlanStatus::Feasible)?);
            }
        }
        Variant::FixedBudget { d } => {
            search.offer(greedy_budget(&eff, d, &spec.keep_set)?);
            let top1 = top1_exact(&eff, &spec.keep_set)?;
            if top1.status != PlanStatus::Infeasible {
                search.offer(top1);
            }
            let swept = rival_sweep(&eff, &pinned, eff.num_locations() - 1, d);
            search.offer(DeletionPlan::from_kept_mask(&eff, &swept, PlanStatus::Feasible)?);
        }
    }
    search.try_completion(&[]);

    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    let mut nodes = 0u64;
    let mut trace = limits.trace.then(Vec::new);
    let mut exhausted = true;
    let mut open_bound = None;
    if let Some(bound) = search.bound(0, &[]) {
        heap.push(Node { bound, depth: 0, id: next_id, deleted: Vec::new() });
        next_id += 1;
    }

    while let Some(node) = heap.pop() {
        if !search.improves(node.bound) {
            break;
        }
        if nodes >= limits.node_cap || (nodes.is_multiple_of(256) && start.elapsed() >= limits.time_cap) {
            exhausted = false;
            open_bound = Some(node.bound);
            break;
        }
        nodes += 1;
        if let Some(trace) = trace.as_mut() {
            if trace.last().is_none_or(|&(_, b)| b != node.bound as f64) {
                trace.push((nodes, node.bound as f64));
            }
        }
        if node.depth == search.order.len() {
            continue;
        }
        let photo = search.order[node.depth];
        let depth = node.depth + 1;

        if search.may_delete_more(node.deleted.len()) {
            let mut deleted = node.deleted.clone();
            deleted.push(photo);
            search.try_completion(&deleted);
            if search.may_delete_more(deleted.len()) || matches!(spec.variant, Variant::TopKGuarantee { .. }) {
                if let Some(bound) = search.bound(depth, &deleted) {
                    heap.push(Node { bound, depth, id: next_id, deleted });
                    next_id += 1;
                }
            }
        }
        if let Some(bound) = search.bound(depth, &node.deleted) {
            heap.push(Node { bound, depth, id: next_id, deleted: node.deleted });
            next_id += 1;
        }
    }

    let incumbent_value = search.incumbent_value();
    let best_bound = open_bound.map_or(incumbent_value, |b| b.max(incumbent_value)) as f64;
    let plan = match search.incumbent.take() {
        Some(plan) if exhausted => plan.with_status(PlanStatus::Optimal),
        Some(plan) => plan,
        None if exhausted => DeletionPlan::keep_all(&eff, PlanStatus::Infeasible),
        None => DeletionPlan::keep_all(&eff, PlanStatus::BudgetExhausted),
    };
    Ok(SolveReport {
        plan,
        proved_optimal: exhausted,
        nodes_explored: nodes,
        best_bound,
        wall_time: start.elapsed(),
        bound_trace: trace,
    })
}
