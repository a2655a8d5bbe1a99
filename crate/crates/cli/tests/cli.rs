use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use geopriv_cli::app::{EvalOutput, SolveOutput};
use geopriv_core::{Instance, PlanStatus};
use serde_json::Value;
use tempfile::TempDir;

const INST_A: &str = r#"{"num_photos":3,"num_locations":3,"true_location":2,"score_kind":"raw",
"photo_ids":["p0","p1","p2"],"scores":[[0,-5,1],[-5,0,1],[2,2,0]]}"#;

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        let sandbox = Self { dir: tempfile::tempdir().unwrap() };
        sandbox.write("a.json", INST_A);
        sandbox
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let path = self.path(name);
        fs::write(&path, text).unwrap();
        path
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap()
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_geopriv")).args(args).current_dir(self.dir.path()).output().unwrap()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn without_metadata(text: &str) -> Value {
    let mut value: Value = serde_json::from_str(text).unwrap();
    value.as_object_mut().unwrap().remove("metadata");
    value
}

#[test]
fn solve_inst_a_top1() {
    let s = Sandbox::new();
    let out = s.run(&["solve", "--input", "a.json", "--variant", "topk", "--k", "1", "--output", "plan.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let solved: SolveOutput = serde_json::from_str(&s.read("plan.json")).unwrap();
    assert_eq!(solved.plan.deleted.len(), 1);
    assert_eq!(solved.plan.protected_k, 1);
    assert_eq!(solved.plan.status, PlanStatus::Optimal);
    assert!(solved.report.proved_optimal);
}

#[test]
fn solvers_agree_on_deletion_count() {
    let s = Sandbox::new();
    for solver in ["exact", "top1", "brute", "greedy"] {
        let out = s.run(&["solve", "--input", "a.json", "--variant", "topk", "--k", "1", "--solver", solver]);
        assert_eq!(code(&out), 0, "{solver}: {}", stderr(&out));
        let solved: SolveOutput = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(solved.plan.deleted.len(), 1, "{solver}");
        assert_eq!(solved.report.solver, if solver == "brute" { "brute_force" } else { solver });
    }
}

#[test]
fn pinned_infeasible_exits_one() {
    let s = Sandbox::new();
    let out = s.run(&["solve", "--input", "a.json", "--variant", "topk", "--k", "1", "--keep", "p0,p1"]);
    assert_eq!(code(&out), 1);
    let solved: SolveOutput = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(solved.plan.status, PlanStatus::Infeasible);
    assert!(solved.plan.deleted.is_empty());
}

#[test]
fn budget_zero_deletes_nothing() {
    let s = Sandbox::new();
    let out = s.run(&["solve", "--input", "a.json", "--variant", "budget", "--d", "0"]);
    assert_eq!(code(&out), 0);
    let solved: SolveOutput = serde_json::from_slice(&out.stdout).unwrap();
    assert!(solved.plan.deleted.is_empty());
    assert_eq!(solved.plan.protected_k, 0);
}

#[test]
fn margin_is_reported_on_both_scales() {
    let s = Sandbox::new();
    let out = s.run(&["solve", "--input", "a.json", "--variant", "budget", "--d", "2", "--margin", "0.5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let solved: SolveOutput = serde_json::from_slice(&out.stdout).unwrap();
    // kept {p2}: [2, 2, 0.5] with the margin, [2, 2, 0] without
    assert_eq!(solved.plan.deleted, vec!["p0", "p1"]);
    assert_eq!(solved.plan.protected_k, 2);
    assert_eq!(solved.plan.protected_k_unmargined, 2);
}

#[test]
fn identical_runs_are_byte_identical_outside_metadata() {
    let s = Sandbox::new();
    let inst = s.run(&["gen", "--kind", "random", "--n", "14", "--m", "9", "--seed", "3", "--output", "r.json"]);
    assert_eq!(code(&inst), 0);
    let args = ["solve", "--input", "r.json", "--variant", "budget", "--d", "5"];
    let first = s.run(&args);
    let second = s.run(&args);
    assert_eq!(code(&first), 0);
    let (a, b) = (String::from_utf8(first.stdout).unwrap(), String::from_utf8(second.stdout).unwrap());
    assert_eq!(without_metadata(&a), without_metadata(&b));
    let strip = |t: &str| t.split("\"metadata\"").next().unwrap().to_string();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn solve_output_round_trips_through_eval() {
    let s = Sandbox::new();
    s.run(&["gen", "--kind", "random", "--n", "12", "--m", "6", "--seed", "8", "--output", "r.json"]);
    let out = s.run(&["solve", "--input", "r.json", "--variant", "topk", "--k", "2", "--output", "plan.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let solved: SolveOutput = serde_json::from_str(&s.read("plan.json")).unwrap();
    let out = s.run(&["eval", "--input", "r.json", "--plan", "plan.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let eval: EvalOutput = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(eval.deleted, solved.plan.deleted);
    assert_eq!(eval.protected_k, solved.plan.protected_k);
    assert!(eval.protected_k >= 2);
}

#[test]
fn eval_rejects_deleting_everything() {
    let s = Sandbox::new();
    s.write("all.json", r#"{"deleted": ["p0", "p1", "p2"]}"#);
    let out = s.run(&["eval", "--input", "a.json", "--plan", "all.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("plan must keep at least one photo"));
}

#[test]
fn eval_bare_plan_with_margin() {
    let s = Sandbox::new();
    s.write("p.json", r#"{"deleted": ["p0"]}"#);
    let out = s.run(&["eval", "--input", "a.json", "--plan", "p.json", "--margin", "0.5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let eval: EvalOutput = serde_json::from_slice(&out.stdout).unwrap();
    // kept {p1, p2}: [-3, 2, 1]; with margin the true location scores 2
    assert_eq!(eval.protected_k, 1);
    assert_eq!(eval.protected_k_margined, 1);
    assert_eq!(eval.top_locations[0].location, 1);
}

#[test]
fn generated_instances_validate_and_are_reproducible() {
    let s = Sandbox::new();
    let cases: [&[&str]; 4] = [
        &["gen", "--kind", "obs1", "--n", "5"],
        &["gen", "--kind", "random", "--n", "10", "--m", "4", "--seed", "2"],
        &["gen", "--kind", "knapsack", "--values", "3,4", "--weights", "2,5", "--value-bound", "4", "--capacity", "5"],
        &["gen", "--kind", "proxy", "--base", "a.json", "--noise", "0"],
    ];
    for args in cases {
        let first = s.run(args);
        assert_eq!(code(&first), 0, "{args:?}: {}", stderr(&first));
        assert_eq!(first.stdout, s.run(args).stdout);
        Instance::from_json(std::str::from_utf8(&first.stdout).unwrap()).unwrap();
    }
    let obs: Instance = Instance::from_json(&String::from_utf8(s.run(cases[0]).stdout).unwrap()).unwrap();
    assert_eq!(obs.num_photos(), 5 + 3);
}

#[test]
fn export_lp_is_deterministic() {
    let s = Sandbox::new();
    let args = ["export-lp", "--input", "a.json", "--variant", "topk", "--k", "1", "--output", "m.lp"];
    assert_eq!(code(&s.run(&args)), 0);
    let first = s.read("m.lp");
    assert_eq!(code(&s.run(&args)), 0);
    assert_eq!(first, s.read("m.lp"));
    assert!(first.starts_with("Maximize\n"));
    assert!(first.contains("mc_lo_on_0: w0 + z0 + 6 z1 - 2 z2 - 10 h0 >= -10"));
    assert!(first.ends_with("End\n"));
}

#[test]
fn bench_obs1_reports_linear_gap() {
    let s = Sandbox::new();
    let out = s.run(&["bench", "--suite", "obs1", "--seed", "0", "--output", "tables"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut reader = csv::Reader::from_path(s.path("tables/obs1_gap.csv")).unwrap();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.unwrap();
        let n: usize = record[0].parse().unwrap();
        assert_eq!(record[2].parse::<usize>().unwrap(), n + 2);
        assert_eq!(&record[3], "2");
        assert_eq!(&record[4], "true");
        rows += 1;
    }
    assert!(rows >= 3);
}

#[test]
fn bench_random_tables_have_expected_shape() {
    let s = Sandbox::new();
    let out = s.run(&["bench", "--suite", "random", "--sizes", "8", "--locations", "6", "--count", "4", "--output", "t"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let header = |name: &str| s.read(&format!("t/{name}")).lines().next().unwrap().to_string();
    assert_eq!(header("topk_deletions.csv"), "collection,k,instances,optimal,greedy,proved");
    assert_eq!(header("budget_protected_k.csv"), "collection,method,12.5%,25%,37.5%,50%,proved");
    assert_eq!(header("budget_overlap.csv"), "collection,12.5%->25%,25%->50%");
    let budget = s.read("t/budget_protected_k.csv");
    let rows: Vec<Vec<&str>> = budget.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let (optimal, greedy) = (&rows[0], &rows[1]);
    for col in 2..6 {
        assert!(optimal[col].parse::<f64>().unwrap() >= greedy[col].parse::<f64>().unwrap());
    }
}

#[test]
fn usage_and_runtime_errors_have_distinct_codes() {
    let s = Sandbox::new();
    assert_eq!(code(&s.run(&["solve", "--input", "a.json", "--variant", "topk"])), 2);
    assert_eq!(code(&s.run(&["solve", "--input", "a.json", "--variant", "topk", "--k", "1", "--d", "1"])), 2);
    assert_eq!(code(&s.run(&["solve", "--input", "a.json", "--variant", "topk", "--k", "3"])), 2);
    assert_eq!(code(&s.run(&["solve", "--input", "a.json", "--variant", "topk", "--k", "1", "--keep", "nope"])), 2);
    assert_eq!(code(&s.run(&["solve", "--input", "a.json", "--variant", "budget", "--d", "1", "--solver", "top1"])), 2);
    assert_eq!(code(&s.run(&["frobnicate"])), 2);
    assert_eq!(code(&s.run(&["solve", "--input", "missing.json", "--variant", "topk", "--k", "1"])), 3);
    s.write("bad.json", r#"{"num_photos":1,"num_locations":2,"true_location":0,"score_kind":"raw","photo_ids":["a"],"scores":[[1]]}"#);
    let out = s.run(&["solve", "--input", "bad.json", "--variant", "topk", "--k", "1"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("row 0 has 1 entries, expected 2"), "{}", stderr(&out));
    assert_eq!(code(&s.run(&["--help"])), 0);
}

#[test]
fn node_cap_is_reported_not_fatal() {
    let s = Sandbox::new();
    s.run(&["gen", "--kind", "random", "--n", "40", "--m", "30", "--seed", "1", "--output", "big.json"]);
    let out = s.run(&["solve", "--input", "big.json", "--variant", "topk", "--k", "5", "--node-cap", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let solved: SolveOutput = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!solved.report.proved_optimal);
    assert_eq!(solved.plan.status, PlanStatus::Feasible);
}
