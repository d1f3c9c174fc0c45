//! Flat JSON configs for each subcommand.
//!
//! An effective config is built in three layers: preset defaults, then the
//! keys of an optional JSON file, then command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sparsebench::bench::BenchmarkSpec;
use sparsebench::model::{Algorithm, GenerateParams, SolverConfig, StoppingRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        let spec = BenchmarkSpec::paper_defaults();
        Self {
            m: spec.m,
            n: spec.n,
            k: spec.k,
            noise_std: spec.noise_std,
            seed: spec.base_seed,
        }
    }
}

impl GenerateConfig {
    pub fn params(&self) -> GenerateParams {
        GenerateParams::new(self.m, self.n, self.k, self.noise_std, self.seed)
    }
}

/// `alpha` and `tau` stay `None` until resolved: `alpha` defaults per family,
/// `tau` to `‖A‖₂⁻²` of the loaded instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub algorithm: Option<Algorithm>,
    pub instance: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub epsilon: f64,
    pub rho: f64,
    pub tau: Option<f64>,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            algorithm: None,
            instance: None,
            alpha: None,
            epsilon: BenchmarkSpec::paper_defaults().epsilon,
            rho: SolverConfig::DEFAULT_RHO,
            tau: None,
            tol: StoppingRule::DEFAULT_TOL,
            max_iters: SolverConfig::DEFAULT_MAX_ITERS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub noise_std: f64,
    pub runs: usize,
    pub algorithms: Vec<Algorithm>,
    pub alpha_l1: f64,
    pub alpha_log: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub tol: f64,
    pub max_iters: usize,
    pub rho: f64,
    pub keep_traces: usize,
}

impl BenchConfig {
    pub fn paper_defaults() -> Self {
        let s = BenchmarkSpec::paper_defaults();
        Self {
            m: s.m,
            n: s.n,
            k: s.k,
            noise_std: s.noise_std,
            runs: s.runs,
            algorithms: s.algorithms,
            alpha_l1: s.alpha_l1,
            alpha_log: s.alpha_log,
            epsilon: s.epsilon,
            seed: s.base_seed,
            tol: s.stop.tol,
            max_iters: s.max_iters,
            rho: s.rho,
            keep_traces: s.keep_traces,
        }
    }

    pub fn spec(&self) -> BenchmarkSpec {
        BenchmarkSpec {
            m: self.m,
            n: self.n,
            k: self.k,
            noise_std: self.noise_std,
            runs: self.runs,
            algorithms: self.algorithms.clone(),
            alpha_l1: self.alpha_l1,
            alpha_log: self.alpha_log,
            epsilon: self.epsilon,
            base_seed: self.seed,
            stop: StoppingRule::relative_step(self.tol),
            max_iters: self.max_iters,
            rho: self.rho,
            keep_traces: self.keep_traces,
            ..BenchmarkSpec::paper_defaults()
        }
    }
}

/// Overlays the top-level keys of the JSON object at `path` onto `base`.
/// Keys that `base` does not have are rejected.
pub fn overlay_file<T: Serialize + DeserializeOwned>(base: T, path: Option<&Path>) -> anyhow::Result<T> {
    let Some(path) = path else {
        return Ok(base);
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let file: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("config file {} is not valid JSON", path.display()))?;
    let serde_json::Value::Object(file) = file else {
        bail!("config file {} must hold a JSON object", path.display());
    };
    let serde_json::Value::Object(mut merged) = serde_json::to_value(base)? else {
        unreachable!("configs serialize to objects");
    };
    for (key, value) in file {
        if !merged.contains_key(&key) {
            bail!("unknown config key '{key}' in {}", path.display());
        }
        merged.insert(key, value);
    }
    serde_json::from_value(serde_json::Value::Object(merged))
        .with_context(|| format!("invalid value in config file {}", path.display()))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
