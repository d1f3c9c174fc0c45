//! Iterative solvers, objectives and the run driver.

mod objective;
mod steps;

use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::model::{Algorithm, ProblemInstance, RegularizerConfig, SolverConfig};
use crate::{Error, Result};

pub use objective::{objective, objective_lasso, objective_loglasso, penalty, surrogate};
pub use steps::{
    step, step_ad_fista, step_ad_ista, step_admm, step_fista, step_ista, step_rw_ista,
    AdmmDuals, AdmmSystem, IterateState, Momentum,
};

/// Entries with `|xᵢ|` at or below this count as zero in `ℓ0` and support
/// computations.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// Per-iteration metrics of the reported iterate `x_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    /// `‖A x_t − y‖₂`
    pub residual: f64,
    /// `‖x_t‖₁`
    pub l1: f64,
    /// Number of components with `|x_{t,i}| > DEFAULT_ZERO_TOL`.
    pub l0: usize,
    /// Objective of the algorithm's own problem (Lasso or Log-Lasso).
    pub objective: f64,
    /// `‖x_t − x_{t−1}‖₂`, zero at `t = 0`.
    pub step_norm: f64,
    /// ADMM only: `‖x − z‖₂`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primal_residual: Option<f64>,
    /// ADMM only: `ρ‖z_t − z_{t−1}‖₂`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub algorithm: Algorithm,
    pub x_final: Vec<f64>,
    pub iters: usize,
    pub converged: bool,
    /// One record per iterate, `t = 0..=iters`.
    pub trace: Vec<TraceRecord>,
    pub final_state: IterateState,
}

impl SolveResult {
    pub fn final_record(&self) -> &TraceRecord {
        self.trace.last().expect("trace always holds t = 0")
    }

    /// `max_t ‖x_t‖₁`.
    pub fn max_l1(&self) -> f64 {
        self.trace.iter().map(|r| r.l1).fold(0.0, f64::max)
    }

    /// `max_t ‖x_t‖₁ / ‖x_final‖₁`; infinite when the final iterate is zero
    /// but an earlier one was not, and 1 when both are zero.
    pub fn l1_overshoot(&self) -> f64 {
        let max = self.max_l1();
        let last = self.final_record().l1;
        if last > 0.0 {
            max / last
        } else if max > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    }
}

/// Count of components with `|xᵢ| > zero_tol`.
pub fn numerical_l0(x: &[f64], zero_tol: f64) -> usize {
    x.iter().filter(|v| v.abs() > zero_tol).count()
}

/// Runs `config.algorithm` from `x₀ = 0`.
pub fn run(
    instance: &ProblemInstance,
    reg: &RegularizerConfig,
    config: &SolverConfig,
) -> Result<SolveResult> {
    run_from(instance, reg, config, vec![0.0; instance.n()])
}

/// Runs `config.algorithm` from `x0`.
///
/// If `reg` was built for a different stepsize than `config.tau`, `λ` is
/// re-derived for `config.tau` (and the log-penalty condition re-checked).
pub fn run_from(
    instance: &ProblemInstance,
    reg: &RegularizerConfig,
    config: &SolverConfig,
    x0: Vec<f64>,
) -> Result<SolveResult> {
    config.validate()?;
    let algorithm = config.algorithm;
    if reg.family() != algorithm.family() {
        return Err(Error::FamilyMismatch {
            algorithm: algorithm.as_str(),
            expected: match algorithm.family() {
                crate::model::Family::L1 => "l1",
                crate::model::Family::Log => "log",
            },
        });
    }
    if reg.n() != instance.n() || x0.len() != instance.n() {
        return Err(Error::DimensionMismatch {
            context: "solver input",
            expected: instance.n(),
            found: if reg.n() != instance.n() { reg.n() } else { x0.len() },
        });
    }
    let reg = if reg.tau() == config.tau {
        reg.clone()
    } else {
        reg.with_tau(config.tau)?
    };
    let admm = match algorithm {
        Algorithm::Admm => Some(AdmmSystem::new(instance, config.rho)?),
        _ => None,
    };
    Runner::new(instance, &reg, config, admm, x0)?.run()
}

/// Run state with cached products `A x_t` (and `A v_t`), so that each
/// proximal-gradient iteration costs one `A` and one `Aᵀ` product.
struct Runner<'a> {
    instance: &'a ProblemInstance,
    reg: &'a RegularizerConfig,
    config: &'a SolverConfig,
    admm: Option<AdmmSystem>,
    state: IterateState,
    ax: Vec<f64>,
    av: Option<Vec<f64>>,
}

impl<'a> Runner<'a> {
    fn new(
        instance: &'a ProblemInstance,
        reg: &'a RegularizerConfig,
        config: &'a SolverConfig,
        admm: Option<AdmmSystem>,
        x0: Vec<f64>,
    ) -> Result<Self> {
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { iter: 0 });
        }
        let state = IterateState::initial(config.algorithm, x0);
        let ax = instance.a().matvec(&state.x)?;
        let av = state.momentum.as_ref().map(|_| ax.clone());
        Ok(Self {
            instance,
            reg,
            config,
            admm,
            state,
            ax,
            av,
        })
    }

    fn record(&self, step_norm: f64, admm_residuals: Option<(f64, f64)>) -> TraceRecord {
        let residual: Vec<f64> = self
            .ax
            .iter()
            .zip(self.instance.y())
            .map(|(a, y)| a - y)
            .collect();
        let x = &self.state.x;
        TraceRecord {
            t: self.state.t,
            residual: linalg::norm2(&residual),
            l1: linalg::norm1(x),
            l0: numerical_l0(x, DEFAULT_ZERO_TOL),
            objective: objective::objective_from_residual(&residual, x, self.reg),
            step_norm,
            primal_residual: admm_residuals.map(|r| r.0),
            dual_residual: admm_residuals.map(|r| r.1),
        }
    }

    /// Advances one iteration, keeping `ax`/`av` in sync with the new state.
    fn advance(&mut self) -> Result<Option<(f64, f64)>> {
        let algorithm = self.config.algorithm;
        let a = self.instance.a();
        match algorithm {
            Algorithm::Admm => {
                let system = self.admm.as_ref().expect("ADMM system built in run_from");
                let next = steps::step_admm(&self.state, self.instance, self.reg, system)?;
                let residuals = steps::admm_residuals(&self.state, &next, system.rho());
                self.ax = a.matvec(&next.x)?;
                self.state = next;
                Ok(Some(residuals))
            }
            Algorithm::Fista | Algorithm::AdFista => {
                let Momentum { v, u } = self
                    .state
                    .momentum
                    .as_ref()
                    .ok_or(Error::Uninitialized("momentum"))?;
                let av = self.av.as_ref().ok_or(Error::Uninitialized("momentum"))?;
                let z = steps::landweber(self.instance, v, av, self.reg.tau())?;
                let x = steps::shrink(algorithm, &z, v, self.reg);
                let ax = a.matvec(&x)?;
                let (u_next, coeff) = steps::momentum_coefficients(*u);
                let v_next = x
                    .iter()
                    .zip(&self.state.x)
                    .map(|(xn, xo)| xn + coeff * (xn - xo))
                    .collect();
                // A v_{t+1} by linearity, without another product.
                let av_next = ax
                    .iter()
                    .zip(&self.ax)
                    .map(|(an, ao)| an + coeff * (an - ao))
                    .collect();
                self.state = IterateState {
                    x,
                    t: self.state.t + 1,
                    momentum: Some(Momentum {
                        v: v_next,
                        u: u_next,
                    }),
                    admm: None,
                };
                self.ax = ax;
                self.av = Some(av_next);
                Ok(None)
            }
            Algorithm::Ista | Algorithm::AdIsta | Algorithm::RwIsta => {
                let z = steps::landweber(self.instance, &self.state.x, &self.ax, self.reg.tau())?;
                let x = steps::shrink(algorithm, &z, &self.state.x, self.reg);
                self.ax = a.matvec(&x)?;
                // t is set by the caller.
                self.state = IterateState::new(x);
                Ok(None)
            }
        }
    }

    fn run(mut self) -> Result<SolveResult> {
        let mut trace = Vec::with_capacity(self.config.max_iters.min(10_000) + 1);
        trace.push(self.record(0.0, None));
        let mut converged = false;
        while self.state.t < self.config.max_iters {
            let t = self.state.t;
            let prev_x = self.state.x.clone();
            let prev_obj = trace.last().map_or(0.0, |r: &TraceRecord| r.objective);
            let admm_residuals = self.advance()?;
            self.state.t = t + 1;
            if self.state.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { iter: t + 1 });
            }
            let step_norm = linalg::distance2(&prev_x, &self.state.x);
            let record = self.record(step_norm, admm_residuals);
            if !record.objective.is_finite() || !record.residual.is_finite() {
                return Err(Error::NonFinite { iter: t + 1 });
            }
            let stop = self
                .config
                .stop
                .is_met(&prev_x, &self.state.x, prev_obj, record.objective);
            trace.push(record);
            if stop {
                converged = true;
                break;
            }
        }
        Ok(SolveResult {
            algorithm: self.config.algorithm,
            x_final: self.state.x.clone(),
            iters: self.state.t,
            converged,
            trace,
            final_state: self.state,
        })
    }
}
