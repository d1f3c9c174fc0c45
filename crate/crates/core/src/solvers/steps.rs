//! One iteration of each algorithm.
//!
//! Every proximal-gradient variant shares the Landweber step
//! `z = p + τ Aᵀ(y − A p)` at a point `p` (the iterate, or the momentum point
//! for the FISTA family) followed by a componentwise shrinkage-thresholding
//! map:
//!
//! | algorithm | threshold | shrinkage |
//! |-----------|-----------|-----------|
//! | ISTA, FISTA | `λ` | `λ` |
//! | AD-ISTA, AD-FISTA | `λ/ε` | `γ(z)` |
//! | RW-ISTA | `λ/(|xᵢ| + ε)` | `λ/(|xᵢ| + ε)` |

use serde::{Deserialize, Serialize};

use crate::linalg::{self, Cholesky};
use crate::model::{Algorithm, Family, ProblemInstance, RegularizerConfig};
use crate::prox;
use crate::{Error, Result};

/// FISTA extrapolation state: momentum point `v` and coefficient `u ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Momentum {
    pub v: Vec<f64>,
    pub u: f64,
}

/// Scaled-form ADMM variables. The reported iterate is the sparse split
/// variable `z`, stored in [`IterateState::x`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmDuals {
    /// Least-squares block `x` of the splitting `x = z`.
    pub primal: Vec<f64>,
    /// Scaled dual variable `u`.
    pub scaled_dual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateState {
    pub x: Vec<f64>,
    pub t: usize,
    pub momentum: Option<Momentum>,
    pub admm: Option<AdmmDuals>,
}

impl IterateState {
    /// Plain state at `x0` with no auxiliaries.
    pub fn new(x0: Vec<f64>) -> Self {
        Self {
            x: x0,
            t: 0,
            momentum: None,
            admm: None,
        }
    }

    /// Start state for `algorithm`: `v₀ = x₀, u₀ = 1` for the FISTA family,
    /// zero duals for ADMM.
    pub fn initial(algorithm: Algorithm, x0: Vec<f64>) -> Self {
        let n = x0.len();
        let mut state = Self::new(x0);
        if algorithm.uses_momentum() {
            state.momentum = Some(Momentum {
                v: state.x.clone(),
                u: 1.0,
            });
        }
        if algorithm == Algorithm::Admm {
            state.admm = Some(AdmmDuals {
                primal: state.x.clone(),
                scaled_dual: vec![0.0; n],
            });
        }
        state
    }
}

fn require_family(reg: &RegularizerConfig, algorithm: Algorithm) -> Result<()> {
    if reg.family() == algorithm.family() {
        Ok(())
    } else {
        Err(Error::FamilyMismatch {
            algorithm: algorithm.as_str(),
            expected: match algorithm.family() {
                Family::L1 => "l1",
                Family::Log => "log",
            },
        })
    }
}

fn require_dims(state: &IterateState, instance: &ProblemInstance, reg: &RegularizerConfig) -> Result<()> {
    for (context, found) in [("iterate", state.x.len()), ("regularizer weights", reg.n())] {
        if found != instance.n() {
            return Err(Error::DimensionMismatch {
                context,
                expected: instance.n(),
                found,
            });
        }
    }
    Ok(())
}

/// `z = p − τ Aᵀ(A p − y)` given `a_point = A p`.
pub(crate) fn landweber(
    instance: &ProblemInstance,
    point: &[f64],
    a_point: &[f64],
    tau: f64,
) -> Result<Vec<f64>> {
    let residual: Vec<f64> = a_point.iter().zip(instance.y()).map(|(a, y)| a - y).collect();
    let grad = instance.a().matvec_transpose(&residual)?;
    Ok(point.iter().zip(&grad).map(|(p, g)| p - tau * g).collect())
}

/// The algorithm's shrinkage-thresholding map applied to `z`; `x_current`
/// feeds the RW-ISTA weights.
pub(crate) fn shrink(
    algorithm: Algorithm,
    z: &[f64],
    x_current: &[f64],
    reg: &RegularizerConfig,
) -> Vec<f64> {
    let lambda = reg.lambda();
    match (algorithm, reg.epsilon()) {
        (Algorithm::RwIsta, Some(eps)) => z
            .iter()
            .zip(lambda)
            .zip(x_current)
            .map(|((&zi, &li), &xi)| {
                let weight = 1.0 / (xi.abs() + eps);
                prox::soft_threshold_scalar(zi, li * weight)
            })
            .collect(),
        (Algorithm::AdIsta | Algorithm::AdFista, Some(eps)) => z
            .iter()
            .zip(lambda)
            .map(|(&zi, &li)| prox::prox_log_scalar(zi, li, eps))
            .collect(),
        _ => z
            .iter()
            .zip(lambda)
            .map(|(&zi, &li)| prox::soft_threshold_scalar(zi, li))
            .collect(),
    }
}

/// `u_{t+1} = (1 + √(1 + 4u_t²))/2`; returns `(u_{t+1}, (u_t − 1)/u_{t+1})`.
pub(crate) fn momentum_coefficients(u: f64) -> (f64, f64) {
    let next = (1.0 + (1.0 + 4.0 * u * u).sqrt()) / 2.0;
    (next, (u - 1.0) / next)
}

fn plain_step(
    algorithm: Algorithm,
    state: &IterateState,
    instance: &ProblemInstance,
    reg: &RegularizerConfig,
) -> Result<IterateState> {
    require_family(reg, algorithm)?;
    require_dims(state, instance, reg)?;
    let ax = instance.a().matvec(&state.x)?;
    let z = landweber(instance, &state.x, &ax, reg.tau())?;
    Ok(IterateState {
        x: shrink(algorithm, &z, &state.x, reg),
        t: state.t + 1,
        momentum: None,
        admm: None,
    })
}

/// `x_{t+1} = S_{λ,λ}(x_t + τAᵀ(y − Ax_t))`.
pub fn step_ista(
    state: &IterateState,
    instance: &ProblemInstance,
    reg: &RegularizerConfig,
) -> Result<IterateState> {
    plain_step(Algorithm::Ista, state, instance, reg)
}

/// `x_{t+1} = S_{λ/ε, γ(z_t)}(z_t)` with `z_t = x_t + τAᵀ(y − Ax_t)`, which is
/// the log prox of `z_t`.
pub fn step_ad_ista(
    state: &IterateState,
    instance: &ProblemInstance,
    reg: &RegularizerConfig,
) -> Result<IterateState> {
    plain_step(Algorithm::AdIsta, state, instance, reg)
}

/// Soft thresholding with per-component level `λᵢ/(|xᵢ| + ε)`, reweighted
/// from the current iterate at every step.
pub fn step_rw_ista(
    state: &IterateState,
    instance: &ProblemInstance,
    reg: &RegularizerConfig,
) -> Result<IterateState> {
    plain_step(Algorithm::RwIsta, state, instance, reg)
}

fn momentum_step(
    algorithm: Algorithm,
    state: &IterateState,
    instance: &ProblemInstance,
    reg: &RegularizerConfig,
) -> Result<IterateState> {
    require_family(reg, algorithm)?;
    require_dims(state, instance, reg)?;
    let Momentum { v, u } = state
        .momentum
        .as_ref()
        .ok_or(Error::Uninitialized("momentum"))?;
    if v.len() != state.x.len() || !(*u >= 1.0) {
        return Err(Error::Uninitialized("momentum"));
    }
    let av = instance.a().matvec(v)?;
    let z = landweber(instance, v, &av, reg.tau())?;
    let x = shrink(algorithm, &z, v, reg);
    let (u_next, coeff) = momentum_coefficients(*u);
    let v_next = x
        .iter()
        .zip(&state.x)
        .map(|(xn, xo)| xn + coeff * (xn - xo))
        .collect();
    Ok(IterateState {
        x,
        t: state.t + 1,
        momentum: Some(Momentum {
            v: v_next,
            u: u_next,
        }),
        admm: None,
    })
}

/// ISTA step at the momentum point `v_t`, then the `u`/`v` update.
pub fn step_fista(
    state: &IterateState,
    instance: &ProblemInstance,
    reg: &RegularizerConfig,
) -> Result<IterateState> {
    momentum_step(Algorithm::Fista, state, instance, reg)
}

/// AD-ISTA step at the momentum point `v_t`, then the `u`/`v` update.
pub fn step_ad_fista(
    state: &IterateState,
    instance: &ProblemInstance,
    reg: &RegularizerConfig,
) -> Result<IterateState> {
    momentum_step(Algorithm::AdFista, state, instance, reg)
}

/// Factorized `AᵀA + ρI` and `Aᵀy`, fixed for a whole ADMM run.
#[derive(Debug, Clone)]
pub struct AdmmSystem {
    factor: Cholesky,
    aty: Vec<f64>,
    rho: f64,
}

impl AdmmSystem {
    pub fn new(instance: &ProblemInstance, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ADMM rho must be positive and finite, got {rho}"
            )));
        }
        let factor = Cholesky::factor(&instance.a().gram_plus_identity(rho))?;
        let aty = instance.a().matvec_transpose(instance.y())?;
        Ok(Self { factor, aty, rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Scaled-form Lasso ADMM:
///
/// ```text
/// x ← (AᵀA + ρI)⁻¹ (Aᵀy + ρ(z − u))
/// z ← S_{α/ρ}(x + u)
/// u ← u + x − z
/// ```
pub fn step_admm(
    state: &IterateState,
    instance: &ProblemInstance,
    reg: &RegularizerConfig,
    system: &AdmmSystem,
) -> Result<IterateState> {
    require_family(reg, Algorithm::Admm)?;
    require_dims(state, instance, reg)?;
    if system.factor.dim() != instance.n() {
        return Err(Error::DimensionMismatch {
            context: "ADMM system",
            expected: instance.n(),
            found: system.factor.dim(),
        });
    }
    let duals = state.admm.as_ref().ok_or(Error::Uninitialized("ADMM"))?;
    let rho = system.rho;
    let z = &state.x;
    let u = &duals.scaled_dual;
    let rhs: Vec<f64> = system
        .aty
        .iter()
        .zip(z.iter().zip(u))
        .map(|(b, (zi, ui))| b + rho * (zi - ui))
        .collect();
    let x = system.factor.solve(&rhs)?;
    let z_next: Vec<f64> = x
        .iter()
        .zip(u)
        .zip(reg.alpha())
        .map(|((xi, ui), a)| prox::soft_threshold_scalar(xi + ui, a / rho))
        .collect();
    let mut u_next = u.clone();
    for ((ui, xi), zi) in u_next.iter_mut().zip(&x).zip(&z_next) {
        *ui += xi - zi;
    }
    Ok(IterateState {
        x: z_next,
        t: state.t + 1,
        momentum: None,
        admm: Some(AdmmDuals {
            primal: x,
            scaled_dual: u_next,
        }),
    })
}

/// Dispatches one step of `algorithm`. ADMM needs its factorized system.
pub fn step(
    algorithm: Algorithm,
    state: &IterateState,
    instance: &ProblemInstance,
    reg: &RegularizerConfig,
    admm: Option<&AdmmSystem>,
) -> Result<IterateState> {
    match algorithm {
        Algorithm::Ista | Algorithm::AdIsta | Algorithm::RwIsta => {
            plain_step(algorithm, state, instance, reg)
        }
        Algorithm::Fista | Algorithm::AdFista => momentum_step(algorithm, state, instance, reg),
        Algorithm::Admm => step_admm(
            state,
            instance,
            reg,
            admm.ok_or(Error::Uninitialized("ADMM system"))?,
        ),
    }
}

/// `‖x − z‖₂` and `ρ‖z − z_prev‖₂` for an ADMM transition.
pub(crate) fn admm_residuals(prev: &IterateState, next: &IterateState, rho: f64) -> (f64, f64) {
    let primal = next
        .admm
        .as_ref()
        .map_or(0.0, |d| linalg::distance2(&d.primal, &next.x));
    (primal, rho * linalg::distance2(&prev.x, &next.x))
}
