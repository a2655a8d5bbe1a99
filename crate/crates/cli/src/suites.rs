//! Greedy-versus-exact sweeps behind `geopriv bench`.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use geopriv_core::gen::CALIBRATED_CONCENTRATION;
use geopriv_core::{
    gen_observation1, gen_random, greedy_budget, greedy_topk, protected_k, solve_bnb, Instance, Limits, PlanStatus,
    ProblemSpec,
};
use serde::Serialize;

pub const OBS1_SIZES: [usize; 7] = [1, 2, 5, 10, 20, 50, 100];
pub const OBS1_EPSILON: f64 = 0.1;
pub const TOPK_LEVELS: [usize; 2] = [1, 5];
/// Deletion budgets as fractions of the collection size.
pub const BUDGET_FRACTIONS: [f64; 4] = [0.125, 0.25, 0.375, 0.5];
/// Budget pairs (as indices into `BUDGET_FRACTIONS`) for the overlap table.
pub const OVERLAP_PAIRS: [(usize, usize); 2] = [(0, 1), (1, 3)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Obs1,
    Topk,
    Budget,
    /// Top-k, budget and overlap tables on random collections.
    Random,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "obs1" => Ok(Suite::Obs1),
            "topk" => Ok(Suite::Topk),
            "budget" => Ok(Suite::Budget),
            "random" => Ok(Suite::Random),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite {other:?} (expected obs1, topk, budget, random or all)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub locations: usize,
    pub count: usize,
    pub limits: Limits,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 0, sizes: vec![16, 32], locations: 64, count: 20, limits: Limits::default() }
    }
}

impl SuiteConfig {
    fn instances(&self, n: usize) -> Result<Vec<Instance>> {
        (0..self.count)
            .map(|c| {
                let seed = self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((n as u64) << 32) ^ c as u64;
                Ok(gen_random(n, self.locations, CALIBRATED_CONCENTRATION, seed)?)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Obs1Row {
    pub n: usize,
    pub epsilon: f64,
    pub greedy: usize,
    pub optimal: usize,
    pub proved_optimal: bool,
}

pub fn obs1_rows(limits: &Limits) -> Result<Vec<Obs1Row>> {
    OBS1_SIZES
        .iter()
        .map(|&n| {
            let inst = gen_observation1(n, OBS1_EPSILON)?;
            let greedy = greedy_topk(&inst, 2, &[])?;
            let exact = solve_bnb(&inst, &ProblemSpec::top_k(2), *limits)?;
            Ok(Obs1Row {
                n,
                epsilon: OBS1_EPSILON,
                greedy: greedy.num_deleted(),
                optimal: exact.plan.num_deleted(),
                proved_optimal: exact.proved_optimal,
            })
        })
        .collect()
}

/// One line of the top-k table: mean deleted fraction over collections
/// whose full prediction was accurate in the top-k sense.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopkRow {
    pub collection: String,
    pub k: usize,
    pub instances: usize,
    pub optimal: f64,
    pub greedy: f64,
    pub proved: usize,
}

pub fn topk_rows(cfg: &SuiteConfig) -> Result<Vec<TopkRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let instances = cfg.instances(n)?;
        for k in TOPK_LEVELS {
            let (mut used, mut proved, mut optimal, mut greedy) = (0, 0, 0.0, 0.0);
            for inst in &instances {
                if k > inst.num_locations() - 1 || protected_k(inst, &(0..n).collect::<Vec<_>>())? >= k {
                    continue;
                }
                let exact = solve_bnb(inst, &ProblemSpec::top_k(k), cfg.limits)?;
                let heuristic = greedy_topk(inst, k, &[])?;
                let feasible = |s: PlanStatus| matches!(s, PlanStatus::Optimal | PlanStatus::Feasible);
                if !feasible(exact.plan.status) || !feasible(heuristic.status) {
                    continue;
                }
                used += 1;
                proved += usize::from(exact.proved_optimal);
                optimal += exact.plan.num_deleted() as f64 / n as f64;
                greedy += heuristic.num_deleted() as f64 / n as f64;
            }
            let mean = |x: f64| if used == 0 { f64::NAN } else { round4(x / used as f64) };
            rows.push(TopkRow {
                collection: format!("R-{n}"),
                k,
                instances: used,
                optimal: mean(optimal),
                greedy: mean(greedy),
                proved,
            });
        }
    }
    Ok(rows)
}

/// One line of the budget table: mean protected-k per deletion budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetRow {
    pub collection: String,
    pub method: &'static str,
    #[serde(rename = "12.5%")]
    pub b12: f64,
    #[serde(rename = "25%")]
    pub b25: f64,
    #[serde(rename = "37.5%")]
    pub b37: f64,
    #[serde(rename = "50%")]
    pub b50: f64,
    pub proved: usize,
}

/// Fraction of photos deleted at the lower budget but kept at the higher.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapRow {
    pub collection: String,
    #[serde(rename = "12.5%->25%")]
    pub low: f64,
    #[serde(rename = "25%->50%")]
    pub high: f64,
}

pub fn budget_rows(cfg: &SuiteConfig) -> Result<(Vec<BudgetRow>, Vec<OverlapRow>)> {
    let mut budget = Vec::new();
    let mut overlap = Vec::new();
    for &n in &cfg.sizes {
        let instances = cfg.instances(n)?;
        let mut optimal = [0.0; 4];
        let mut greedy = [0.0; 4];
        let mut proved = 0;
        let mut dropped = [(0.0, 0usize); 2];
        for inst in &instances {
            let mut plans = Vec::new();
            for (slot, frac) in BUDGET_FRACTIONS.iter().enumerate() {
                let d = ((n as f64 * frac).floor() as usize).min(n - 1);
                let exact = solve_bnb(inst, &ProblemSpec::budget(d), cfg.limits)?;
                optimal[slot] += exact.plan.protected_k as f64;
                greedy[slot] += greedy_budget(inst, d, &[])?.protected_k as f64;
                proved += usize::from(exact.proved_optimal);
                plans.push(exact.plan.deleted);
            }
            for (pair, &(lo, hi)) in OVERLAP_PAIRS.iter().enumerate() {
                if plans[lo].is_empty() {
                    continue;
                }
                let lost = plans[lo].iter().filter(|i| !plans[hi].contains(i)).count();
                dropped[pair].0 += lost as f64 / plans[lo].len() as f64;
                dropped[pair].1 += 1;
            }
        }
        let count = instances.len().max(1) as f64;
        let row = |method, sums: [f64; 4], proved| BudgetRow {
            collection: format!("R-{n}"),
            method,
            b12: round4(sums[0] / count),
            b25: round4(sums[1] / count),
            b37: round4(sums[2] / count),
            b50: round4(sums[3] / count),
            proved,
        };
        budget.push(row("optimal", optimal, proved));
        budget.push(row("greedy", greedy, 0));
        let frac = |(sum, used): (f64, usize)| if used == 0 { f64::NAN } else { round4(sum / used as f64) };
        overlap.push(OverlapRow { collection: format!("R-{n}"), low: frac(dropped[0]), high: frac(dropped[1]) });
    }
    Ok((budget, overlap))
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut writer = csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(path)
}

/// Runs `suite` and writes its tables into `dir`; returns the files written.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut written = Vec::new();
    if matches!(suite, Suite::Obs1 | Suite::All) {
        written.push(write_csv(dir, "obs1_gap.csv", &obs1_rows(&cfg.limits)?)?);
    }
    if matches!(suite, Suite::Topk | Suite::Random | Suite::All) {
        written.push(write_csv(dir, "topk_deletions.csv", &topk_rows(cfg)?)?);
    }
    if matches!(suite, Suite::Budget | Suite::Random | Suite::All) {
        let (budget, overlap) = budget_rows(cfg)?;
        written.push(write_csv(dir, "budget_protected_k.csv", &budget)?);
        written.push(write_csv(dir, "budget_overlap.csv", &overlap)?);
    }
    Ok(written)
}
