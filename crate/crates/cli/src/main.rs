//! `sparsebench`: generate instances, run single solves and benchmark batches.
//!
//! Exit codes: 0 on success, 1 on invalid arguments or hyperparameters,
//! 2 on runtime failures (I/O, solver aborts).

mod config;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sparsebench::bench::{self, TraceFormat};
use sparsebench::model::{
    self, Algorithm, Family, RegularizerConfig, SolverConfig, StoppingRule,
};
use sparsebench::solvers::{self, DEFAULT_ZERO_TOL};

use config::{overlay_file, write_json, BenchConfig, GenerateConfig, SolveConfig};

const THREADS_ENV: &str = "SPARSEBENCH_THREADS";

#[derive(Parser)]
#[command(name = "sparsebench", version, about = "Sparse recovery solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random instance and write it to <out>/instance.json.
    Generate(GenerateArgs),
    /// Run one algorithm on a stored instance.
    Solve(SolveArgs),
    /// Run a randomized benchmark batch.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    noise_std: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// JSON file with flat config keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// ista, fista, ad-ista, ad-fista, rw-ista or admm.
    #[arg(long)]
    algorithm: Option<String>,
    /// Instance file written by `generate`.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Penalty weight; defaults to 1e-3 for the l1 family and 4e-4 for the log family.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Stepsize; defaults to 1/||A||^2.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Start from the 500x1000, k=10, 100-run preset. This is also the base
    /// when the flag is absent.
    #[arg(long)]
    paper_defaults: bool,
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated algorithm list.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    noise_std: Option<f64>,
    #[arg(long)]
    alpha_l1: Option<f64>,
    #[arg(long)]
    alpha_log: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    /// Write full traces for this many leading runs.
    #[arg(long)]
    keep_traces: Option<usize>,
}

/// Error tagged with the exit code it maps to.
enum Failure {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<sparsebench::Error> for Failure {
    fn from(err: sparsebench::Error) -> Self {
        if err.is_validation() {
            Failure::Validation(err.into())
        } else {
            Failure::Runtime(err.into())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Failure::Runtime(err)
    }
}

type CliResult<T> = Result<T, Failure>;

fn invalid(msg: impl std::fmt::Display) -> Failure {
    Failure::Validation(anyhow!("{msg}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = configure_threads().and_then(|()| match cli.command {
        Command::Generate(args) => generate(args),
        Command::Solve(args) => solve(args),
        Command::Bench(args) => run_bench(args),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| invalid(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("cannot build thread pool")?;
    Ok(())
}

fn layered<T>(base: T, path: Option<&Path>) -> CliResult<T>
where
    T: Serialize + serde::de::DeserializeOwned,
{
    overlay_file(base, path).map_err(Failure::Validation)
}

fn create_out_dir(out: &Path) -> CliResult<()> {
    fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    Ok(())
}

fn parse_algorithm(name: &str) -> CliResult<Algorithm> {
    Ok(name.parse::<Algorithm>()?)
}

fn generate(args: GenerateArgs) -> CliResult<()> {
    let mut cfg = layered(GenerateConfig::default(), args.config.as_deref())?;
    cfg.m = args.m.unwrap_or(cfg.m);
    cfg.n = args.n.unwrap_or(cfg.n);
    cfg.k = args.k.unwrap_or(cfg.k);
    cfg.noise_std = args.noise_std.unwrap_or(cfg.noise_std);
    cfg.seed = args.seed.unwrap_or(cfg.seed);

    let instance = model::generate_instance(&cfg.params())?;
    create_out_dir(&args.out)?;
    let path = args.out.join("instance.json");
    model::save_instance(&instance, &path)?;
    write_json(&cfg, &args.out.join("config.json"))?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct SolveReport {
    algorithm: Algorithm,
    iters: usize,
    converged: bool,
    tau: f64,
    final_residual: f64,
    final_l1: f64,
    final_l0: usize,
    final_objective: f64,
    max_l1: f64,
    support_recovered: Option<bool>,
    x_final: Vec<f64>,
}

fn solve(args: SolveArgs) -> CliResult<()> {
    let mut cfg = layered(SolveConfig::default(), args.config.as_deref())?;
    if let Some(name) = &args.algorithm {
        cfg.algorithm = Some(parse_algorithm(name)?);
    }
    cfg.instance = args.instance.or(cfg.instance);
    cfg.alpha = args.alpha.or(cfg.alpha);
    cfg.epsilon = args.epsilon.unwrap_or(cfg.epsilon);
    cfg.rho = args.rho.unwrap_or(cfg.rho);
    cfg.tau = args.tau.or(cfg.tau);
    cfg.tol = args.tol.unwrap_or(cfg.tol);
    cfg.max_iters = args.max_iters.unwrap_or(cfg.max_iters);

    let algorithm = cfg.algorithm.ok_or_else(|| invalid("--algorithm is required"))?;
    let instance_path = cfg
        .instance
        .clone()
        .ok_or_else(|| invalid("--instance is required"))?;
    let instance = match model::load_instance(&instance_path) {
        Err(sparsebench::Error::Io(err)) => {
            return Err(Failure::Runtime(
                anyhow!(err).context(format!("cannot read instance {}", instance_path.display())),
            ))
        }
        other => other?,
    };

    let family = algorithm.family();
    let alpha = *cfg.alpha.get_or_insert(match family {
        Family::L1 => bench::BenchmarkSpec::paper_defaults().alpha_l1,
        Family::Log => bench::BenchmarkSpec::paper_defaults().alpha_log,
    });
    let tau = match cfg.tau {
        Some(tau) => tau,
        None => *cfg.tau.insert(model::recommended_tau(&instance)?),
    };
    let n = instance.n();
    let reg = match family {
        Family::L1 => RegularizerConfig::lasso(alpha, tau, n)?,
        Family::Log => RegularizerConfig::log(alpha, cfg.epsilon, tau, n)?,
    };
    let solver = SolverConfig::new(algorithm, tau)
        .with_stop(StoppingRule::relative_step(cfg.tol))
        .with_max_iters(cfg.max_iters)
        .with_rho(cfg.rho);
    let result = solvers::run(&instance, &reg, &solver)?;

    create_out_dir(&args.out)?;
    let support_recovered = match instance.true_support() {
        Some(_) => Some(bench::support_recovery(&result, &instance, DEFAULT_ZERO_TOL)?),
        None => None,
    };
    let last = result.final_record();
    let report = SolveReport {
        algorithm,
        iters: result.iters,
        converged: result.converged,
        tau,
        final_residual: last.residual,
        final_l1: last.l1,
        final_l0: last.l0,
        final_objective: last.objective,
        max_l1: result.max_l1(),
        support_recovered,
        x_final: result.x_final.clone(),
    };
    write_json(&report, &args.out.join("result.json"))?;
    bench::trajectory_export(&result, args.out.join("trace.csv"), TraceFormat::Csv)?;
    write_json(&cfg, &args.out.join("config.json"))?;
    println!(
        "{}: {} iterations, converged = {}, residual = {:.6e}, l1 = {:.6e}, l0 = {}",
        algorithm.label(),
        result.iters,
        result.converged,
        last.residual,
        last.l1,
        last.l0
    );
    Ok(())
}

fn run_bench(args: BenchArgs) -> CliResult<()> {
    let mut cfg = layered(BenchConfig::paper_defaults(), args.config.as_deref())?;
    if let Some(names) = &args.algorithms {
        cfg.algorithms = names
            .iter()
            .map(|s| parse_algorithm(s))
            .collect::<CliResult<_>>()?;
    }
    cfg.runs = args.runs.unwrap_or(cfg.runs);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.m = args.m.unwrap_or(cfg.m);
    cfg.n = args.n.unwrap_or(cfg.n);
    cfg.k = args.k.unwrap_or(cfg.k);
    cfg.noise_std = args.noise_std.unwrap_or(cfg.noise_std);
    cfg.alpha_l1 = args.alpha_l1.unwrap_or(cfg.alpha_l1);
    cfg.alpha_log = args.alpha_log.unwrap_or(cfg.alpha_log);
    cfg.epsilon = args.epsilon.unwrap_or(cfg.epsilon);
    cfg.tol = args.tol.unwrap_or(cfg.tol);
    cfg.max_iters = args.max_iters.unwrap_or(cfg.max_iters);
    cfg.rho = args.rho.unwrap_or(cfg.rho);
    cfg.keep_traces = args.keep_traces.unwrap_or(cfg.keep_traces);

    let spec = cfg.spec();
    spec.validate()?;
    let report = bench::run_benchmark(&spec)?;

    let out = &args.out;
    create_out_dir(out)?;
    fs::write(out.join("report.json"), report.to_json()?).context("cannot write report.json")?;
    let table = report.to_table();
    fs::write(out.join("report.txt"), &table).context("cannot write report.txt")?;
    let runs = fs::File::create(out.join("runs.csv")).context("cannot create runs.csv")?;
    bench::write_runs_csv(&report.rows, BufWriter::new(runs))?;
    write_json(&cfg, &out.join("config.json"))?;
    if !report.traces.is_empty() {
        let dir = out.join("traces");
        create_out_dir(&dir)?;
        for t in &report.traces {
            let file = fs::File::create(dir.join(format!("run{}_{}.csv", t.run, t.algorithm)))
                .context("cannot create trace file")?;
            bench::write_trace_csv(&t.trace, BufWriter::new(file))?;
        }
    }
    print!("{table}");
    Ok(())
}
