//! `geopriv` command line. Exit codes: 0 success, 1 infeasible result,
//! 2 usage error, 3 runtime error.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use geopriv_core::gen::CALIBRATED_CONCENTRATION;
use geopriv_core::{
    build_milp, export_lp, gen_knapsack_reduction, gen_observation1, gen_proxy, gen_random, solve, Error, Instance,
    KnapsackParams, Limits, PlanStatus, SolverKind,
};
use serde::{Deserialize, Serialize};

use crate::service::{self, ServiceConfig};
use crate::suites::{run_suite, Suite, SuiteConfig};
use crate::views::{ranked_locations, PlanView, ProblemInput, RankedLocation, ReportView, VariantName, TOP_LOCATIONS};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INFEASIBLE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "geopriv", version, about = "Choose photos to delete so a collection hides its true location")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a top-k guarantee or fixed-budget problem.
    Solve(SolveArgs),
    /// Recompute protected-k for an external plan.
    Eval(EvalArgs),
    /// Write the linearized model in LP format.
    ExportLp(ExportArgs),
    /// Generate an instance.
    Gen(GenArgs),
    /// Run greedy-versus-exact sweeps and write CSV tables.
    Bench(BenchArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct ProblemArgs {
    #[arg(long, value_enum)]
    variant: VariantName,
    /// Number of rivals that must outrank the true location (topk).
    #[arg(long, conflicts_with = "d")]
    k: Option<usize>,
    /// Deletion budget (budget).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    margin: f64,
    /// Photo ids that must not be deleted.
    #[arg(long, value_delimiter = ',')]
    keep: Vec<String>,
}

impl ProblemArgs {
    fn input(&self) -> ProblemInput {
        ProblemInput { variant: self.variant, k: self.k, d: self.d, margin: self.margin, keep_set: self.keep.clone() }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = "exact")]
    solver: SolverKind,
    /// Wall-clock cap in seconds.
    #[arg(long)]
    time_cap: Option<f64>,
    #[arg(long)]
    node_cap: Option<u64>,
    /// Defaults to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    input: PathBuf,
    /// A `solve` output or `{"deleted": [ids]}`.
    #[arg(long)]
    plan: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    margin: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenKind {
    Obs1,
    Knapsack,
    Random,
    Proxy,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Photos (obs1: uniform photos; random: collection size).
    #[arg(long)]
    n: Option<usize>,
    /// Locations (random).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = CALIBRATED_CONCENTRATION)]
    concentration: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Knapsack item values.
    #[arg(long, value_delimiter = ',')]
    values: Vec<u64>,
    /// Knapsack item weights.
    #[arg(long, value_delimiter = ',')]
    weights: Vec<u64>,
    #[arg(long)]
    value_bound: Option<u64>,
    #[arg(long)]
    capacity: Option<u64>,
    /// Base instance (proxy).
    #[arg(long)]
    base: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    noise: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
    /// Collection sizes for the random suites.
    #[arg(long, value_delimiter = ',', default_value = "16,32")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 64)]
    locations: usize,
    /// Instances per collection size.
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Per-solve cap in seconds.
    #[arg(long, default_value_t = 10.0)]
    time_cap: f64,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Upper limit on any request's solve time, in seconds.
    #[arg(long, default_value_t = 30.0)]
    max_time_cap: f64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Problem and parameter errors are the caller's fault; the rest is runtime.
fn classify(e: Error) -> Failure {
    match e {
        Error::InvalidSpec(_)
        | Error::InvalidMargin(_)
        | Error::InvalidLimits(_)
        | Error::UnsupportedSolver { .. }
        | Error::TooLarge { .. }
        | Error::Generator(_)
        | Error::Decode(_)
        | Error::PhotoOutOfRange { .. } => Failure::Usage(e.to_string()),
        other => Failure::Runtime(other.into()),
    }
}

/// Output of `solve`. Only `metadata` varies between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub problem: ProblemInput,
    pub plan: PlanView,
    pub report: ReportView,
    pub metadata: RunMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub wall_time_ms: f64,
}

/// Output of `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub deleted: Vec<String>,
    pub num_kept: usize,
    pub protected_k: usize,
    pub margin: f64,
    pub protected_k_margined: usize,
    pub top_locations: Vec<RankedLocation>,
}

/// Plans accepted by `eval`: a full `solve` output or a bare deletion list.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PlanFile {
    Solved { plan: DeletedIds },
    Bare(DeletedIds),
}

#[derive(Debug, Deserialize)]
struct DeletedIds {
    deleted: Vec<String>,
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Solve(args) => cmd_solve(args),
        Command::Eval(args) => cmd_eval(args),
        Command::ExportLp(args) => cmd_export(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Serve(args) => cmd_serve(args),
    }
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Instance::from_json(&text).with_context(|| format!("invalid instance {}", path.display())).map_err(Failure::Runtime)
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes()).context("cannot write to stdout")?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("views serialize");
    text.push('\n');
    text
}

fn seconds(value: f64, flag: &str) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(value).map_err(|_| usage(format!("{flag} must be a non-negative number of seconds")))
}

fn cmd_solve(args: SolveArgs) -> Result<u8, Failure> {
    let inst = read_instance(&args.input)?;
    let problem = args.problem.input();
    let spec = problem.to_spec(&inst).map_err(usage)?;
    let mut limits = Limits::default();
    if let Some(cap) = args.time_cap {
        limits = limits.with_time_cap(seconds(cap, "--time-cap")?);
    }
    if let Some(cap) = args.node_cap {
        limits = limits.with_node_cap(cap);
    }
    let report = solve(&inst, &spec, args.solver, limits).map_err(classify)?;
    let out = SolveOutput {
        problem,
        plan: PlanView::new(&inst, &report.plan),
        report: ReportView::new(args.solver.name(), &report),
        metadata: RunMetadata { wall_time_ms: report.wall_time.as_secs_f64() * 1e3 },
    };
    emit(args.output.as_deref(), &to_json(&out))?;
    Ok(if report.plan.status == PlanStatus::Infeasible { EXIT_INFEASIBLE } else { EXIT_OK })
}

fn cmd_eval(args: EvalArgs) -> Result<u8, Failure> {
    let inst = read_instance(&args.input)?;
    let text = fs::read_to_string(&args.plan).with_context(|| format!("cannot read {}", args.plan.display()))?;
    let ids = match serde_json::from_str::<PlanFile>(&text).with_context(|| format!("invalid plan {}", args.plan.display()))? {
        PlanFile::Solved { plan } | PlanFile::Bare(plan) => plan.deleted,
    };
    let mut deleted = inst.resolve_ids(&ids).map_err(usage)?;
    deleted.sort_unstable();
    deleted.dedup();
    if deleted.len() == inst.num_photos() {
        return Err(usage("plan must keep at least one photo"));
    }
    let mut kept = vec![true; inst.num_photos()];
    for &i in &deleted {
        kept[i] = false;
    }
    let protected_k = geopriv_core::model::protected_k_mask(&inst, &kept).map_err(classify)?;
    let protected_k_margined = crate::views::margined_protected_k(&inst, &kept, args.margin).map_err(classify)?;
    let out = EvalOutput {
        deleted: deleted.iter().map(|&i| inst.photo_ids()[i].clone()).collect(),
        num_kept: inst.num_photos() - deleted.len(),
        protected_k,
        margin: args.margin,
        protected_k_margined,
        top_locations: ranked_locations(&inst, &kept, TOP_LOCATIONS),
    };
    emit(args.output.as_deref(), &to_json(&out))?;
    Ok(EXIT_OK)
}

fn cmd_export(args: ExportArgs) -> Result<u8, Failure> {
    let inst = read_instance(&args.input)?;
    let spec = args.problem.input().to_spec(&inst).map_err(usage)?;
    let model = build_milp(&inst, &spec).map_err(classify)?;
    emit(args.output.as_deref(), &export_lp(&model))?;
    Ok(EXIT_OK)
}

fn cmd_gen(args: GenArgs) -> Result<u8, Failure> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| usage(format!("--kind needs {flag}")));
    let inst = match args.kind {
        GenKind::Obs1 => gen_observation1(need(args.n, "--n")?, args.epsilon),
        GenKind::Random => gen_random(need(args.n, "--n")?, need(args.m, "--m")?, args.concentration, args.seed),
        GenKind::Knapsack => {
            let (Some(value_bound), Some(capacity)) = (args.value_bound, args.capacity) else {
                return Err(usage("--kind knapsack needs --value-bound and --capacity"));
            };
            gen_knapsack_reduction(&KnapsackParams { values: args.values, weights: args.weights, value_bound, capacity })
        }
        GenKind::Proxy => {
            let base = args.base.as_deref().ok_or_else(|| usage("--kind proxy needs --base"))?;
            gen_proxy(&read_instance(base)?, args.noise, args.seed)
        }
    }
    .map_err(classify)?;
    let mut text = inst.to_json_pretty();
    text.push('\n');
    emit(args.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn cmd_bench(args: BenchArgs) -> Result<u8, Failure> {
    if args.sizes.iter().any(|&n| n < 2) || args.locations < 2 || args.count == 0 {
        return Err(usage("--sizes must be at least 2, --locations at least 2 and --count positive"));
    }
    let cfg = SuiteConfig {
        seed: args.seed,
        sizes: args.sizes,
        locations: args.locations,
        count: args.count,
        limits: Limits::default().with_time_cap(seconds(args.time_cap, "--time-cap")?),
    };
    for path in run_suite(args.suite, &cfg, &args.output)? {
        println!("{}", path.display());
    }
    Ok(EXIT_OK)
}

fn cmd_serve(args: ServeArgs) -> Result<u8, Failure> {
    let config = ServiceConfig { max_time_cap: seconds(args.max_time_cap, "--max-time-cap")? };
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new().context("cannot start the async runtime")?;
    runtime.block_on(service::serve(addr, config)).map_err(|e| Failure::Runtime(anyhow!(e)))?;
    Ok(EXIT_OK)
}
