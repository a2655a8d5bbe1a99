//! Mixed-integer encoding of both variants, linearized with per-rival big-T
//! McCormick rows, plus LP-file export and assignment decoding.
//!
//! Variables: `z_i = 1` keeps photo `i`; `h_j = 1` claims rival `j`
//! reaches the true location; `w_j` stands for the product `h_j * v_j`
//! where `v_j = sum_i z_i (S_i^j - S_i^t - theta)`. The five rows per rival
//! force `w_j = 0` when `h_j = 0` and `0 <= w_j = v_j` when `h_j = 1`.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{apply_margin, Instance};
use crate::problem::{DeletionPlan, PlanStatus, ProblemSpec, Variant};

/// Distance from {0, 1} tolerated on binary values in a decoded assignment.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Var {
    /// `z_i`
    Keep(usize),
    /// `h_j`
    Rival(usize),
    /// `w_j`
    Product(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Keep(i) => write!(f, "z{i}"),
            Var::Rival(j) => write!(f, "h{j}"),
            Var::Product(j) => write!(f, "w{j}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparator {
    Le,
    Ge,
    Eq,
}

impl Comparator {
    fn symbol(self) -> &'static str {
        match self {
            Comparator::Le => "<=",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparator::Le => lhs <= rhs,
            Comparator::Ge => lhs >= rhs,
            Comparator::Eq => lhs == rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(Var, f64)>,
    pub cmp: Comparator,
    pub rhs: f64,
}

/// `v_j` as a linear expression over the `z_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RivalExpression {
    pub rival: usize,
    pub terms: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearModel {
    pub binaries: Vec<Var>,
    /// Free continuous variables (their sign rows live in `rows`).
    pub continuous: Vec<Var>,
    pub rows: Vec<Row>,
    /// Maximized.
    pub objective: Vec<(Var, f64)>,
    pub expressions: Vec<RivalExpression>,
    /// `(j, T_j)` for every rival.
    pub big_t: Vec<(usize, f64)>,
}

impl LinearModel {
    pub fn rows_mentioning(&self, var: Var) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.terms.iter().any(|&(v, _)| v == var))
    }
}

/// Builds the linearized model for `spec`.
pub fn build_milp(instance: &Instance, spec: &ProblemSpec) -> Result<LinearModel> {
    spec.validate(instance)?;
    let n = instance.num_photos();
    let t = instance.true_location();
    let rivals: Vec<usize> = instance.rivals().collect();

    let mut binaries: Vec<Var> = (0..n).map(Var::Keep).collect();
    binaries.extend(rivals.iter().map(|&j| Var::Rival(j)));
    let continuous: Vec<Var> = rivals.iter().map(|&j| Var::Product(j)).collect();

    let mut rows = Vec::new();
    let mut expressions = Vec::new();
    let mut big_t = Vec::new();
    for &j in &rivals {
        let coeffs: Vec<f64> =
            (0..n).map(|i| instance.score(i, j) - instance.score(i, t) - spec.margin).collect();
        let big = 1.0 + coeffs.iter().map(|c| c.abs()).sum::<f64>();
        let v: Vec<(usize, f64)> =
            coeffs.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(i, &c)| (i, c)).collect();
        let (w, h) = (Var::Product(j), Var::Rival(j));
        let minus_v = || v.iter().map(|&(i, c)| (Var::Keep(i), -c));

        rows.push(Row { name: format!("mc_nonneg_{j}"), terms: vec![(w, 1.0)], cmp: Comparator::Ge, rhs: 0.0 });
        rows.push(Row {
            name: format!("mc_lo_off_{j}"),
            terms: vec![(w, 1.0), (h, big)],
            cmp: Comparator::Ge,
            rhs: 0.0,
        });
        rows.push(Row {
            name: format!("mc_hi_off_{j}"),
            terms: vec![(w, 1.0), (h, -big)],
            cmp: Comparator::Le,
            rhs: 0.0,
        });
        let mut lo_on = vec![(w, 1.0)];
        lo_on.extend(minus_v());
        lo_on.push((h, -big));
        rows.push(Row { name: format!("mc_lo_on_{j}"), terms: lo_on, cmp: Comparator::Ge, rhs: -big });
        let mut hi_on = vec![(w, 1.0)];
        hi_on.extend(minus_v());
        hi_on.push((h, big));
        rows.push(Row { name: format!("mc_hi_on_{j}"), terms: hi_on, cmp: Comparator::Le, rhs: big });

        expressions.push(RivalExpression { rival: j, terms: v });
        big_t.push((j, big));
    }

    let all_z = || (0..n).map(|i| (Var::Keep(i), 1.0)).collect::<Vec<_>>();
    let objective = match spec.variant {
        Variant::TopKGuarantee { k } => {
            rows.push(Row {
                name: "k_guarantee".into(),
                terms: rivals.iter().map(|&j| (Var::Rival(j), 1.0)).collect(),
                cmp: Comparator::Ge,
                rhs: k as f64,
            });
            all_z()
        }
        Variant::FixedBudget { d } => {
            // sum_i (1 - z_i) <= d
            rows.push(Row { name: "budget".into(), terms: all_z(), cmp: Comparator::Ge, rhs: (n - d) as f64 });
            rivals.iter().map(|&j| (Var::Rival(j), 1.0)).collect()
        }
    };
    rows.push(Row { name: "nonempty".into(), terms: all_z(), cmp: Comparator::Ge, rhs: 1.0 });
    for &i in &spec.keep_set {
        rows.push(Row { name: format!("keep_{i}"), terms: vec![(Var::Keep(i), 1.0)], cmp: Comparator::Eq, rhs: 1.0 });
    }

    Ok(LinearModel { binaries, continuous, rows, objective, expressions, big_t })
}

/// `%.12g`-style rendering: 12 significant digits, shortest form.
pub fn format_coefficient(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

const TERMS_PER_LINE: usize = 16;

fn write_terms(out: &mut String, terms: &[(Var, f64)]) {
    for (n, &(var, c)) in terms.iter().enumerate() {
        if n > 0 && n % TERMS_PER_LINE == 0 {
            out.push_str("\n  ");
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        let mag = c.abs();
        match (n, mag == 1.0) {
            (0, true) if c < 0.0 => write!(out, "- {var}"),
            (0, true) => write!(out, "{var}"),
            (0, false) if c < 0.0 => write!(out, "- {} {var}", format_coefficient(mag)),
            (0, false) => write!(out, "{} {var}", format_coefficient(mag)),
            (_, true) => write!(out, " {sign} {var}"),
            (_, false) => write!(out, " {sign} {} {var}", format_coefficient(mag)),
        }
        .expect("writing to a String cannot fail");
    }
}

/// Deterministic CPLEX-style LP text.
pub fn export_lp(model: &LinearModel) -> String {
    let mut out = String::from("Maximize\n obj: ");
    write_terms(&mut out, &model.objective);
    out.push_str("\nSubject To\n");
    for row in &model.rows {
        write!(out, " {}: ", row.name).unwrap();
        write_terms(&mut out, &row.terms);
        writeln!(out, " {} {}", row.cmp.symbol(), format_coefficient(row.rhs)).unwrap();
    }
    out.push_str("Bounds\n");
    for var in &model.continuous {
        writeln!(out, " {var} free").unwrap();
    }
    out.push_str("Binary\n");
    for chunk in model.binaries.chunks(TERMS_PER_LINE) {
        let names: Vec<String> = chunk.iter().map(Var::to_string).collect();
        writeln!(out, " {}", names.join(" ")).unwrap();
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodedSolution {
    pub plan: DeletionPlan,
    /// Disagreements between the claimed `h_j` and the recomputed ranks.
    pub warnings: Vec<String>,
}

/// Turns a solver assignment back into a plan. Only the `z_i` are trusted;
/// protected-k is recomputed from the kept rows.
pub fn decode_solution(
    instance: &Instance,
    spec: &ProblemSpec,
    assignment: &HashMap<String, f64>,
    solver_optimal: bool,
) -> Result<DecodedSolution> {
    spec.validate(instance)?;
    let n = instance.num_photos();
    let mut kept = vec![false; n];
    for (i, slot) in kept.iter_mut().enumerate() {
        let name = Var::Keep(i).to_string();
        let value = *assignment.get(&name).ok_or_else(|| Error::Decode(format!("missing variable {name}")))?;
        *slot = if (value - 1.0).abs() <= INTEGRALITY_TOLERANCE {
            true
        } else if value.abs() <= INTEGRALITY_TOLERANCE {
            false
        } else {
            return Err(Error::Decode(format!("{name} = {value} is not binary")));
        };
    }
    if !kept.iter().any(|&k| k) {
        return Err(Error::Decode("plan must keep at least one photo".into()));
    }

    let eff = apply_margin(instance, spec.margin)?;
    let mut plan = DeletionPlan::from_kept_mask(&eff, &kept, PlanStatus::Feasible)?;
    let satisfied = spec.is_satisfied_by(&plan);
    plan.status = match (satisfied, solver_optimal) {
        (true, true) => PlanStatus::Optimal,
        (true, false) => PlanStatus::Feasible,
        (false, _) => PlanStatus::Infeasible,
    };

    let mut warnings = Vec::new();
    let scores = crate::model::aggregate_mask(&eff, &kept)?;
    let truly_higher = crate::model::higher_set(&scores, eff.true_location());
    let mut claimed = 0usize;
    for j in eff.rivals() {
        let Some(&h) = assignment.get(&Var::Rival(j).to_string()) else { continue };
        if h > 0.5 {
            claimed += 1;
            if !truly_higher.contains(&j) {
                warnings.push(format!("h{j} = 1 but location {j} does not reach the true location"));
            }
        }
    }
    if claimed != plan.protected_k {
        warnings.push(format!("claimed protected-k {claimed}, recomputed {}", plan.protected_k));
    }
    Ok(DecodedSolution { plan, warnings })
}
