//! Independent oracles and seeded case generators shared by the
//! integration suites.

#![allow(dead_code)]

use std::collections::HashMap;

use geopriv_core::milp::{LinearModel, Var};
use geopriv_core::model::{protected_k_mask, rival_outranks, Instance};
use geopriv_core::{gen_random, KnapsackParams, ProblemSpec};
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A seeded random instance paired with a problem to solve on it.
#[derive(Debug, Clone)]
pub struct Case {
    pub seed: u64,
    pub instance: Instance,
    pub keep_set: Vec<usize>,
    pub margin: f64,
}

impl Case {
    pub fn top_k(&self, k: usize) -> ProblemSpec {
        ProblemSpec::top_k(k).with_keep(self.keep_set.clone()).with_margin(self.margin)
    }

    pub fn budget(&self, d: usize) -> ProblemSpec {
        ProblemSpec::budget(d).with_keep(self.keep_set.clone()).with_margin(self.margin)
    }
}

/// `count` small cases with `N <= max_n`, `M <= max_m`; roughly a third pin
/// one or two photos and half use margin 0.5.
pub fn random_cases(count: usize, max_n: usize, max_m: usize, seed: u64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|c| {
            let n = rng.random_range(2..=max_n);
            let m = rng.random_range(2..=max_m);
            let concentration = [0.3, 1.0, 2.0][rng.random_range(0..3)];
            let inst_seed = seed.wrapping_mul(1_000_003).wrapping_add(c as u64);
            let instance = gen_random(n, m, concentration, inst_seed).unwrap();
            let keep_set = if rng.random_range(0..3) == 0 {
                let pins = rng.random_range(1..=2usize.min(n - 1));
                rand::seq::index::sample(&mut rng, n, pins).into_vec()
            } else {
                Vec::new()
            };
            let margin = if rng.random_bool(0.5) { 0.5 } else { 0.0 };
            Case { seed: inst_seed, instance, keep_set, margin }
        })
        .collect()
}

/// Every deletion set (sorted) outside the pins that keeps a photo.
pub fn deletion_sets(n: usize, pinned: &[usize], max_size: usize) -> impl Iterator<Item = Vec<usize>> {
    let free: Vec<usize> = (0..n).filter(|i| !pinned.contains(i)).collect();
    let top = max_size.min(free.len()).min(n - 1);
    (0..=top).flat_map(move |s| free.clone().into_iter().combinations(s))
}

pub fn kept_mask(n: usize, deleted: &[usize]) -> Vec<bool> {
    let mut kept = vec![true; n];
    for &i in deleted {
        kept[i] = false;
    }
    kept
}

/// All optimal deletion sets of the fixed-budget problem (no pins, no margin).
pub fn budget_optima(inst: &Instance, d: usize) -> (usize, Vec<Vec<usize>>) {
    let n = inst.num_photos();
    let scored: Vec<(usize, Vec<usize>)> = deletion_sets(n, &[], d)
        .map(|del| (protected_k_mask(inst, &kept_mask(n, &del)).unwrap(), del))
        .collect();
    let best = scored.iter().map(|(pk, _)| *pk).max().unwrap();
    (best, scored.into_iter().filter(|(pk, _)| *pk == best).map(|(_, d)| d).collect())
}

/// Supplement Algorithm 1 transcribed literally (deletion budgets outermost,
/// rivals inner, ascending `S^j - S^t`), with keep-set exclusion, a zero
/// budget, and the `>=` tie rule. Returns the deletion count.
pub fn algorithm1_deletions(inst: &Instance, keep_set: &[usize]) -> Option<usize> {
    let n = inst.num_photos();
    let t = inst.true_location();
    let free: Vec<usize> = (0..n).filter(|i| !keep_set.contains(i)).collect();
    for d in 0..n {
        if d > free.len() {
            break;
        }
        for j in inst.rivals() {
            let diff = |i: usize| inst.score(i, j) - inst.score(i, t);
            let mut sorted = free.clone();
            sorted.sort_by(|&a, &b| diff(a).total_cmp(&diff(b)).then(a.cmp(&b)));
            let kept = kept_mask(n, &sorted[..d]);
            if rival_outranks(inst, &kept, j) {
                return Some(d);
            }
        }
    }
    None
}

/// Textbook 0/1 knapsack DP: can value `>= V` fit in capacity `W`?
pub fn knapsack_decision(p: &KnapsackParams) -> bool {
    let cap = p.capacity as usize;
    let mut best = vec![0u64; cap + 1];
    for (&v, &w) in p.values.iter().zip(&p.weights) {
        let w = w as usize;
        for c in (w..=cap).rev() {
            best[c] = best[c].max(best[c - w] + v);
        }
    }
    best[cap] >= p.value_bound
}

pub fn random_knapsack(rng: &mut ChaCha8Rng, max_objects: usize) -> KnapsackParams {
    let count = rng.random_range(1..=max_objects);
    let values: Vec<u64> = (0..count).map(|_| rng.random_range(1..=20)).collect();
    let weights: Vec<u64> = (0..count).map(|_| rng.random_range(1..=20)).collect();
    let total_w: u64 = weights.iter().sum();
    let capacity = rng.random_range(1..=total_w);
    let mut p = KnapsackParams { values, weights, value_bound: 1, capacity };
    // land right at the decision boundary, on either side of it
    let mut lo = 1;
    let mut hi = p.values.iter().sum::<u64>() + 1;
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        p.value_bound = mid;
        if knapsack_decision(&p) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    p.value_bound = lo + rng.random_range(0..=1);
    p
}

/// Feasibility tolerance when checking linear rows by enumeration.
pub const ROW_TOLERANCE: f64 = 1e-9;

/// Given values for every binary, whether the free continuous variables can
/// satisfy all rows. Each row may mention at most one continuous variable.
pub fn continuous_feasible(model: &LinearModel, binaries: &HashMap<Var, f64>) -> bool {
    let mut bounds: HashMap<Var, (f64, f64)> =
        model.continuous.iter().map(|&v| (v, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    for row in &model.rows {
        let mut fixed = 0.0;
        let mut cont: Option<(Var, f64)> = None;
        for &(var, c) in &row.terms {
            match binaries.get(&var) {
                Some(x) => fixed += c * x,
                None => {
                    assert!(cont.is_none(), "row {} has two continuous terms", row.name);
                    cont = Some((var, c));
                }
            }
        }
        let rest = row.rhs - fixed;
        use geopriv_core::milp::Comparator::*;
        match cont {
            None => {
                let ok = match row.cmp {
                    Le => fixed <= row.rhs + ROW_TOLERANCE,
                    Ge => fixed >= row.rhs - ROW_TOLERANCE,
                    Eq => (fixed - row.rhs).abs() <= ROW_TOLERANCE,
                };
                if !ok {
                    return false;
                }
            }
            Some((var, a)) => {
                let b = bounds.get_mut(&var).unwrap();
                let x = rest / a;
                let (lower, upper) = match (row.cmp, a > 0.0) {
                    (Eq, _) => (true, true),
                    (Ge, true) | (Le, false) => (true, false),
                    (Le, true) | (Ge, false) => (false, true),
                };
                if lower {
                    b.0 = b.0.max(x);
                }
                if upper {
                    b.1 = b.1.min(x);
                }
            }
        }
    }
    bounds.values().all(|&(lo, hi)| lo <= hi + ROW_TOLERANCE)
}

/// Exhaustive optimum of the linearized model: the best objective over all
/// binary assignments admitting feasible continuous values.
pub fn milp_optimum(model: &LinearModel) -> Option<f64> {
    let nb = model.binaries.len();
    assert!(nb <= 20, "too many binaries to enumerate");
    let mut best: Option<f64> = None;
    for bits in 0u32..(1 << nb) {
        let values: HashMap<Var, f64> =
            model.binaries.iter().enumerate().map(|(b, &v)| (v, ((bits >> b) & 1) as f64)).collect();
        if continuous_feasible(model, &values) {
            let obj: f64 = model.objective.iter().map(|(v, c)| c * values[v]).sum();
            if best.is_none_or(|b| obj > b) {
                best = Some(obj);
            }
        }
    }
    best
}

/// Minimal LP-format reader: objective terms, constraint names in order,
/// free variables and binaries.
#[derive(Debug, Default)]
pub struct ParsedLp {
    pub sense: String,
    pub objective: String,
    pub rows: Vec<String>,
    pub free: Vec<String>,
    pub binaries: Vec<String>,
}

pub fn parse_lp(text: &str) -> ParsedLp {
    let mut out = ParsedLp::default();
    let mut section = "";
    for line in text.lines() {
        match line.trim() {
            "Maximize" | "Minimize" => {
                out.sense = line.trim().to_string();
                section = "obj";
            }
            "Subject To" => section = "rows",
            "Bounds" => section = "bounds",
            "Binary" => section = "binary",
            "End" => section = "",
            body => match section {
                "obj" => {
                    out.objective.push_str(body.trim_start_matches("obj:").trim());
                }
                "rows" if !line.starts_with("  ") => {
                    out.rows.push(body.split(':').next().unwrap().to_string());
                }
                "bounds" => out.free.push(body.trim_end_matches(" free").to_string()),
                "binary" => out.binaries.extend(body.split_whitespace().map(str::to_string)),
                _ => {}
            },
        }
    }
    out
}
