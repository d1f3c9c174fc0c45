//! Randomized benchmark batches over synthetic compressed-sensing instances.
//!
//! Every run draws one instance from `base_seed + run` and executes every
//! requested algorithm on that same instance, so comparisons between
//! algorithms are paired. Runs execute in parallel on the current rayon pool;
//! rows are sorted by run index before aggregation, so the report does not
//! depend on scheduling.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{
    self, generate_instance, Algorithm, Family, GenerateParams, ProblemInstance, RegularizerConfig,
    SolverConfig, StoppingRule,
};
use crate::solvers::{self, SolveResult, TraceRecord, DEFAULT_ZERO_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub noise_std: f64,
    pub runs: usize,
    pub algorithms: Vec<Algorithm>,
    /// Lasso weight `α`; the ISTA threshold is `τα`.
    pub alpha_l1: f64,
    /// Log-Lasso weight `α`; AD-ISTA uses `λ = τα`.
    pub alpha_log: f64,
    pub epsilon: f64,
    pub base_seed: u64,
    pub stop: StoppingRule,
    pub max_iters: usize,
    pub rho: f64,
    pub magnitude: (f64, f64),
    pub zero_tol: f64,
    /// Keep full traces for this many leading runs.
    pub keep_traces: usize,
}

impl BenchmarkSpec {
    /// The 500×1000, k = 10 experiment with 100 runs.
    pub fn paper_defaults() -> Self {
        Self {
            m: 500,
            n: 1000,
            k: 10,
            noise_std: 0.1,
            runs: 100,
            algorithms: Algorithm::ALL.to_vec(),
            alpha_l1: 1e-3,
            alpha_log: 4e-4,
            epsilon: 1e-2,
            base_seed: 0,
            stop: StoppingRule::relative_step(1e-8),
            max_iters: SolverConfig::DEFAULT_MAX_ITERS,
            rho: SolverConfig::DEFAULT_RHO,
            magnitude: GenerateParams::DEFAULT_MAGNITUDE,
            zero_tol: DEFAULT_ZERO_TOL,
            keep_traces: 1,
        }
    }

    pub fn seed_of(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidParameter("runs must be >= 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParameter("no algorithms requested".into()));
        }
        if !(self.alpha_l1 >= 0.0) || !(self.alpha_log >= 0.0) {
            return Err(Error::InvalidParameter("alpha must be nonnegative".into()));
        }
        if !(self.zero_tol >= 0.0) {
            return Err(Error::InvalidParameter("zero_tol must be nonnegative".into()));
        }
        let mut params = GenerateParams::new(self.m, self.n, self.k, self.noise_std, self.base_seed);
        params.magnitude = self.magnitude;
        params.validate()?;
        SolverConfig {
            algorithm: Algorithm::Ista,
            tau: 1.0,
            max_iters: self.max_iters,
            stop: self.stop,
            rho: self.rho,
        }
        .validate()
    }

    fn generate_params(&self, run: usize) -> GenerateParams {
        let mut params = GenerateParams::new(self.m, self.n, self.k, self.noise_std, self.seed_of(run));
        params.magnitude = self.magnitude;
        params
    }
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self::paper_defaults()
    }
}

/// Outcome of one algorithm on one run's instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub run: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub iters: usize,
    pub converged: bool,
    pub support_recovered: bool,
    pub final_residual: Option<f64>,
    pub final_l1: Option<f64>,
    pub max_l1: Option<f64>,
    pub final_l0: Option<usize>,
    /// Set when the solver aborted; the row then counts as a non-converged
    /// run at the iteration cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRow {
    /// `max_t ‖x_t‖₁ / ‖x_final‖₁`.
    pub fn l1_overshoot(&self) -> Option<f64> {
        match (self.max_l1, self.final_l1) {
            (Some(max), Some(last)) if last > 0.0 => Some(max / last),
            (Some(max), Some(_)) if max > 0.0 => Some(f64::INFINITY),
            (Some(_), Some(_)) => Some(1.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub converged: usize,
    pub failures: usize,
    pub mean_iters: f64,
    pub min_iters: usize,
    pub max_iters: usize,
    pub median_iters: f64,
    pub support_recovery_rate: f64,
    pub mean_final_residual: Option<f64>,
    pub mean_final_l1: Option<f64>,
}

impl AlgorithmSummary {
    /// Aggregates the rows of one algorithm (rows of other algorithms are
    /// ignored).
    pub fn from_rows(algorithm: Algorithm, rows: &[RunRow]) -> Self {
        let rows: Vec<&RunRow> = rows.iter().filter(|r| r.algorithm == algorithm).collect();
        let mut iters: Vec<usize> = rows.iter().map(|r| r.iters).collect();
        iters.sort_unstable();
        let count = rows.len();
        let mean = |vals: Vec<f64>| {
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        let median_iters = match count {
            0 => 0.0,
            c if c % 2 == 1 => iters[c / 2] as f64,
            c => (iters[c / 2 - 1] + iters[c / 2]) as f64 / 2.0,
        };
        Self {
            algorithm,
            runs: count,
            converged: rows.iter().filter(|r| r.converged).count(),
            failures: rows.iter().filter(|r| r.error.is_some()).count(),
            mean_iters: mean(iters.iter().map(|&i| i as f64).collect()).unwrap_or(0.0),
            min_iters: iters.first().copied().unwrap_or(0),
            max_iters: iters.last().copied().unwrap_or(0),
            median_iters,
            support_recovery_rate: if count == 0 {
                0.0
            } else {
                rows.iter().filter(|r| r.support_recovered).count() as f64 / count as f64
            },
            mean_final_residual: mean(rows.iter().filter_map(|r| r.final_residual).collect()),
            mean_final_l1: mean(rows.iter().filter_map(|r| r.final_l1).collect()),
        }
    }
}

/// Full trace of one algorithm on one run, kept for the leading runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub run: usize,
    pub algorithm: Algorithm,
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub spec: BenchmarkSpec,
    pub summaries: Vec<AlgorithmSummary>,
    pub rows: Vec<RunRow>,
    #[serde(skip)]
    pub traces: Vec<RunTrace>,
}

impl BenchmarkReport {
    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm)
    }

    pub fn rows_for(&self, algorithm: Algorithm) -> impl Iterator<Item = &RunRow> {
        self.rows.iter().filter(move |r| r.algorithm == algorithm)
    }

    pub fn row(&self, run: usize, algorithm: Algorithm) -> Option<&RunRow> {
        self.rows
            .iter()
            .find(|r| r.run == run && r.algorithm == algorithm)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Aligned text table: Algorithm, Mean, Min, Max of the iteration counts,
    /// plus median, convergence and support-recovery columns.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>9} {:>6} {:>6} {:>8} {:>9} {:>9}",
            "Algorithm", "Mean", "Min", "Max", "Median", "Conv", "Support"
        );
        let _ = writeln!(out, "{}", "-".repeat(63));
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{:<10} {:>9.2} {:>6} {:>6} {:>8.1} {:>9} {:>8.0}%",
                s.algorithm.label(),
                s.mean_iters,
                s.min_iters,
                s.max_iters,
                s.median_iters,
                format!("{}/{}", s.converged, s.runs),
                100.0 * s.support_recovery_rate,
            );
        }
        out
    }
}

/// True iff the numerical support of `x_final` equals the true support.
pub fn support_recovery(
    result: &SolveResult,
    instance: &ProblemInstance,
    zero_tol: f64,
) -> Result<bool> {
    let truth = instance.true_support().ok_or(Error::MissingGroundTruth)?;
    Ok(model::support(&result.x_final, zero_tol) == truth)
}

struct RunOutput {
    rows: Vec<RunRow>,
    traces: Vec<RunTrace>,
}

fn failed_row(spec: &BenchmarkSpec, run: usize, algorithm: Algorithm, err: &Error) -> RunRow {
    RunRow {
        run,
        seed: spec.seed_of(run),
        algorithm,
        iters: spec.max_iters,
        converged: false,
        support_recovered: false,
        final_residual: None,
        final_l1: None,
        max_l1: None,
        final_l0: None,
        error: Some(err.to_string()),
    }
}

fn execute_run(spec: &BenchmarkSpec, run: usize) -> Result<RunOutput> {
    let setup = generate_instance(&spec.generate_params(run)).and_then(|instance| {
        let tau = model::recommended_tau(&instance)?;
        Ok((instance, tau))
    });
    let (instance, tau) = match setup {
        Ok(v) => v,
        Err(err) => {
            let rows = spec
                .algorithms
                .iter()
                .map(|&alg| failed_row(spec, run, alg, &err))
                .collect();
            return Ok(RunOutput {
                rows,
                traces: Vec::new(),
            });
        }
    };
    let n = instance.n();
    let lasso = RegularizerConfig::lasso(spec.alpha_l1, tau, n)?;
    let log = RegularizerConfig::log(spec.alpha_log, spec.epsilon, tau, n)?;

    let mut rows = Vec::with_capacity(spec.algorithms.len());
    let mut traces = Vec::new();
    for &algorithm in &spec.algorithms {
        let reg = match algorithm.family() {
            Family::L1 => &lasso,
            Family::Log => &log,
        };
        let config = SolverConfig {
            algorithm,
            tau,
            max_iters: spec.max_iters,
            stop: spec.stop,
            rho: spec.rho,
        };
        match solvers::run(&instance, reg, &config) {
            Ok(result) => {
                let last = result.final_record();
                rows.push(RunRow {
                    run,
                    seed: spec.seed_of(run),
                    algorithm,
                    iters: result.iters,
                    converged: result.converged,
                    support_recovered: support_recovery(&result, &instance, spec.zero_tol)?,
                    final_residual: Some(last.residual),
                    final_l1: Some(last.l1),
                    max_l1: Some(result.max_l1()),
                    final_l0: Some(solvers::numerical_l0(&result.x_final, spec.zero_tol)),
                    error: None,
                });
                if run < spec.keep_traces {
                    traces.push(RunTrace {
                        run,
                        algorithm,
                        trace: result.trace,
                    });
                }
            }
            Err(err) if err.is_validation() => return Err(err),
            Err(err) => rows.push(failed_row(spec, run, algorithm, &err)),
        }
    }
    Ok(RunOutput { rows, traces })
}

/// Runs the batch on the current rayon thread pool.
pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<BenchmarkReport> {
    spec.validate()?;
    let outputs: Vec<RunOutput> = (0..spec.runs)
        .into_par_iter()
        .map(|run| execute_run(spec, run))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(spec.runs * spec.algorithms.len());
    let mut traces = Vec::new();
    for out in outputs {
        rows.extend(out.rows);
        traces.extend(out.traces);
    }
    let order = |alg: Algorithm| spec.algorithms.iter().position(|&a| a == alg);
    rows.sort_by_key(|r| (r.run, order(r.algorithm)));
    traces.sort_by_key(|t| (t.run, order(t.algorithm)));
    let summaries = spec
        .algorithms
        .iter()
        .map(|&alg| AlgorithmSummary::from_rows(alg, &rows))
        .collect();
    Ok(BenchmarkReport {
        spec: spec.clone(),
        summaries,
        rows,
        traces,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    Csv,
    Json,
}

pub const TRACE_CSV_HEADER: &str = "t,residual,l1,l0,objective,step_norm";

/// Writes one CSV row per trace record. Reals use 17 significant digits, so
/// parsing recovers them exactly.
pub fn write_trace_csv<W: Write>(trace: &[TraceRecord], mut w: W) -> Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for r in trace {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{},{:.16e},{:.16e}",
            r.t, r.residual, r.l1, r.l0, r.objective, r.step_norm
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a CSV produced by [`write_trace_csv`]. ADMM-only columns are not
/// part of the CSV and come back as `None`.
pub fn read_trace_csv<R: BufRead>(reader: R) -> Result<Vec<TraceRecord>> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::MalformedFile("empty trace file".into()))?;
    if header.trim() != TRACE_CSV_HEADER {
        return Err(Error::MalformedFile(format!("unexpected trace header '{header}'")));
    }
    let bad = |line: &str| Error::MalformedFile(format!("bad trace row '{line}'"));
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad(&line));
        }
        let real = |s: &str| s.parse::<f64>().map_err(|_| bad(&line));
        out.push(TraceRecord {
            t: f[0].parse().map_err(|_| bad(&line))?,
            residual: real(f[1])?,
            l1: real(f[2])?,
            l0: f[3].parse().map_err(|_| bad(&line))?,
            objective: real(f[4])?,
            step_norm: real(f[5])?,
            primal_residual: None,
            dual_residual: None,
        });
    }
    Ok(out)
}

/// Writes a solver trace as CSV (header plus one row per `t = 0..=iters`) or
/// as a JSON array of records.
pub fn trajectory_export(result: &SolveResult, path: impl AsRef<Path>, format: TraceFormat) -> Result<()> {
    let file = std::io::BufWriter::new(fs::File::create(path)?);
    match format {
        TraceFormat::Csv => write_trace_csv(&result.trace, file),
        TraceFormat::Json => {
            let mut file = file;
            serde_json::to_writer_pretty(&mut file, &result.trace)?;
            file.write_all(b"\n")?;
            Ok(())
        }
    }
}

pub const RUNS_CSV_HEADER: &str =
    "run,seed,algorithm,iters,converged,support_recovered,final_residual,final_l1,max_l1,final_l0,error";

/// Per-run rows as CSV; empty cells stand for missing values.
pub fn write_runs_csv<W: Write>(rows: &[RunRow], mut w: W) -> Result<()> {
    writeln!(w, "{RUNS_CSV_HEADER}")?;
    let real = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.run,
            r.seed,
            r.algorithm,
            r.iters,
            r.converged,
            r.support_recovered,
            real(r.final_residual),
            real(r.final_l1),
            real(r.max_l1),
            r.final_l0.map(|v| v.to_string()).unwrap_or_default(),
            r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        )?;
    }
    w.flush()?;
    Ok(())
}
