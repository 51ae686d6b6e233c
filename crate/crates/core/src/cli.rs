//! The `outlier-reduce` command line.
//!
//! Exit codes: 0 success, 1 malformed input or usage, 2 infeasible,
//! 3 work budget exceeded. Set `OUTLIER_REDUCE_LOG` (e.g. `debug`) for logs.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bmatching::{prune_left, solve_bmatching, BMatchingProblem};
use crate::gen::{generate, FacilityMode, GenConstraint, GenMetric, GeneratorConfig};
use crate::instance::{validate_solution, ClusteringInstance};
use crate::io::{load_instance, read_file, write_json, IoError, SolutionFile};
use crate::oracle::{exact_outlier_opt, OracleBudget, OracleError};
use crate::reduction::{derive_seed, run_trials, ReductionConfig, ReductionError};
use crate::sampling::SamplingMode;
use crate::solvers::{ExactSolver, LocalSearchSolver, SolveError, SolverPlugin, DEFAULT_EXACT_BUDGET};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MALFORMED: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "outlier-reduce",
    version,
    about = "Constrained k-median / k-means with outliers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random instance file.
    Gen(GenArgs),
    /// Solve an instance with the outlier reduction.
    Solve(SolveArgs),
    /// Solve a small instance exactly by brute force.
    Oracle(OracleArgs),
    /// Validate a solution against an instance.
    Eval(EvalArgs),
    /// Solve a standalone b-matching problem (debugging aid).
    Bmatch(BmatchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    Matrix,
    Ulam,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConstraintArg {
    Unconstrained,
    Capacitated,
    SizeBounds,
    LabelCounts,
    LabelFractions,
    OutlierLabelQuota,
}

#[derive(Debug, clap::Args)]
struct GenArgs {
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, value_enum, default_value = "euclidean")]
    metric: MetricArg,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    perm_len: usize,
    #[arg(long, default_value_t = 1)]
    z: u32,
    #[arg(long, value_enum, default_value = "unconstrained")]
    constraint: ConstraintArg,
    #[arg(long, default_value_t = 2)]
    labels: usize,
    /// Place m points far from every cluster.
    #[arg(long)]
    planted: bool,
    /// Leave the planted points out of the facility set.
    #[arg(long)]
    exclude_planted_facilities: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverArg {
    Exact,
    LocalSearch,
}

#[derive(Debug, clap::Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Baseline approximation factor; defaults to 5 (z = 1) or 25 (z = 2).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_enum, default_value = "exact")]
    solver: SolverArg,
    #[arg(long, default_value_t = DEFAULT_EXACT_BUDGET)]
    exact_budget: u64,
    /// Use every client as the outlier pool instead of sampling.
    #[arg(long)]
    exhaustive_sample: bool,
    /// Override the number of D^z draws.
    #[arg(long)]
    pool_size: Option<usize>,
    /// Master seed, split into baseline, sampling and solver streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    baseline_seed: Option<u64>,
    #[arg(long)]
    sample_seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Stop enumerating once a zero-cost solution is found.
    #[arg(long)]
    early_stop: bool,
    /// Include per-iteration records (with wall times) in the output.
    #[arg(long)]
    stats: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a run report (digest, config, timings, ratio) here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Oracle solution used to compute the approximation ratio.
    #[arg(long)]
    oracle_solution: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EXACT_BUDGET)]
    exact_budget: u64,
    #[arg(long, default_value_t = 12)]
    max_n: usize,
    #[arg(long, default_value_t = 3)]
    max_k: usize,
    #[arg(long, default_value_t = 2)]
    max_m: usize,
    #[arg(long, default_value_t = 12)]
    max_f: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct EvalArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct BmatchArgs {
    #[arg(long)]
    input: PathBuf,
    /// Keep only the given number of cheapest left vertices per right vertex.
    #[arg(long)]
    prune: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl ToString) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::new(EXIT_MALFORMED, e)
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("OUTLIER_REDUCE_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_MALFORMED } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bmatch(a) => cmd_bmatch(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Failure> {
    match out {
        Some(path) => write_json(path, value)?,
        None => println!("{}", serde_json::to_string_pretty(value).map_err(IoError::from)?),
    }
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<i32, Failure> {
    let cfg = GeneratorConfig {
        n: a.n,
        k: a.k,
        m: a.m,
        metric: match a.metric {
            MetricArg::Euclidean => GenMetric::Euclidean { dim: a.dim },
            MetricArg::Matrix => GenMetric::Matrix,
            MetricArg::Ulam => GenMetric::Ulam { perm_len: a.perm_len },
        },
        z: a.z,
        constraint: match a.constraint {
            ConstraintArg::Unconstrained => GenConstraint::Unconstrained,
            ConstraintArg::Capacitated => GenConstraint::Capacitated,
            ConstraintArg::SizeBounds => GenConstraint::SizeBounds,
            ConstraintArg::LabelCounts => GenConstraint::LabelCounts,
            ConstraintArg::LabelFractions => GenConstraint::LabelFractions,
            ConstraintArg::OutlierLabelQuota => GenConstraint::OutlierLabelQuota,
        },
        num_labels: a.labels,
        planted: a.planted,
        facilities: if a.exclude_planted_facilities {
            FacilityMode::ExcludePlanted
        } else {
            FacilityMode::Clients
        },
        seed: a.seed,
    };
    let generated = generate(&cfg).map_err(|e| Failure::new(EXIT_MALFORMED, e))?;
    emit(a.out.as_deref(), &generated.file)?;
    Ok(EXIT_OK)
}

fn load(path: &Path) -> Result<(ClusteringInstance, String), Failure> {
    let bytes = read_file(path)?;
    let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    Ok((load_instance(path)?, digest))
}

fn solve_error(e: ReductionError) -> Failure {
    let code = match &e {
        ReductionError::NoFeasible | ReductionError::Solver(SolveError::Infeasible) => EXIT_INFEASIBLE,
        ReductionError::Solver(SolveError::WorkBound { .. }) => EXIT_BUDGET,
        _ => EXIT_MALFORMED,
    };
    Failure::new(code, e)
}

fn oracle_error(e: OracleError) -> Failure {
    let code = match &e {
        OracleError::Infeasible => EXIT_INFEASIBLE,
        OracleError::OverBudget(_) | OracleError::Solver(SolveError::WorkBound { .. }) => EXIT_BUDGET,
        _ => EXIT_MALFORMED,
    };
    Failure::new(code, e)
}

#[derive(Debug, Serialize)]
struct StageMillis {
    baseline: f64,
    sampling: f64,
    matching: f64,
    solver: f64,
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Debug, Serialize)]
struct RunReport {
    instance_sha256: String,
    solver: String,
    trials: usize,
    config: ReductionConfig,
    solution: SolutionFile,
    q: usize,
    stage_ms: StageMillis,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
}

fn cmd_solve(a: SolveArgs) -> Result<i32, Failure> {
    let (inst, digest) = load(&a.input)?;
    if a.parallel == 0 || a.trials == 0 {
        return Err(Failure::new(EXIT_MALFORMED, "--parallel and --trials must be positive"));
    }
    let config = ReductionConfig {
        epsilon: a.epsilon,
        beta: a.beta,
        sampling: if a.exhaustive_sample {
            SamplingMode::Exhaustive
        } else {
            SamplingMode::Random
        },
        pool_size: a.pool_size,
        baseline_seed: a.baseline_seed.unwrap_or_else(|| derive_seed(a.seed, "baseline")),
        sample_seed: a.sample_seed.unwrap_or_else(|| derive_seed(a.seed, "sampling")),
        solver_seed: derive_seed(a.seed, "solver"),
        parallelism: a.parallel,
        early_stop: a.early_stop,
    };
    let exact = ExactSolver { budget: a.exact_budget };
    let plugin: &dyn SolverPlugin = match a.solver {
        SolverArg::Exact => &exact,
        SolverArg::LocalSearch => &LocalSearchSolver,
    };
    let outcome = run_trials(&inst, &config, plugin, a.trials).map_err(solve_error)?;
    let file = SolutionFile::from_outcome(&inst, &outcome, a.stats);
    emit(a.out.as_deref(), &file)?;

    if let Some(path) = &a.report {
        let oracle_cost = match &a.oracle_solution {
            Some(p) => Some(SolutionFile::load(p)?.cost),
            None => None,
        };
        let ratio = oracle_cost.map(|o| {
            if o > 0.0 {
                outcome.solution.cost / o
            } else if outcome.solution.cost <= 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        });
        let t = &outcome.timings;
        let report = RunReport {
            instance_sha256: digest,
            solver: plugin.name().to_string(),
            trials: a.trials,
            config,
            solution: SolutionFile::from_outcome(&inst, &outcome, false),
            q: outcome.q,
            stage_ms: StageMillis {
                baseline: millis(t.baseline),
                sampling: millis(t.sampling),
                matching: millis(t.matching),
                solver: millis(t.solver),
            },
            oracle_cost,
            ratio,
        };
        write_json(path, &report)?;
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(a: OracleArgs) -> Result<i32, Failure> {
    let (inst, _) = load(&a.input)?;
    let budget = OracleBudget {
        max_n: a.max_n,
        max_k: a.max_k,
        max_m: a.max_m,
        max_f: a.max_f,
        exact_budget: a.exact_budget,
    };
    let sol = exact_outlier_opt(&inst, &budget).map_err(oracle_error)?;
    emit(a.out.as_deref(), &SolutionFile::from_solution(&inst, &sol))?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct EvalReport {
    feasible: bool,
    reported_cost: f64,
    recomputed_cost: f64,
    violations: Vec<String>,
}

fn cmd_eval(a: EvalArgs) -> Result<i32, Failure> {
    let (inst, _) = load(&a.input)?;
    let file = SolutionFile::load(&a.solution)?;
    let sol = file.to_solution(&inst)?;
    let report = validate_solution(&inst, &sol);
    emit(
        a.out.as_deref(),
        &EvalReport {
            feasible: report.feasible,
            reported_cost: sol.cost,
            recomputed_cost: report.recomputed_cost,
            violations: report.violations.iter().map(ToString::to_string).collect(),
        },
    )?;
    Ok(if report.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn cmd_bmatch(a: BmatchArgs) -> Result<i32, Failure> {
    let bytes = read_file(&a.input)?;
    let mut problem: BMatchingProblem = serde_json::from_slice(&bytes).map_err(IoError::from)?;
    problem.validate().map_err(|e| Failure::new(EXIT_MALFORMED, e))?;
    if let Some(m) = a.prune {
        problem = prune_left(&problem, m);
    }
    match solve_bmatching(&problem) {
        Ok(sol) => {
            emit(a.out.as_deref(), &sol)?;
            Ok(EXIT_OK)
        }
        Err(e) => Err(Failure::new(EXIT_INFEASIBLE, e)),
    }
}
