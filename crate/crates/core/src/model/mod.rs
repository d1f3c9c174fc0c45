//! Problem instances and solver/regularizer configuration.

mod generate;
mod io;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, DenseMatrix};
use crate::{Error, Result};

pub use generate::{generate_instance, GenerateParams};
pub use io::{load_instance, read_instance, save_instance, write_instance, INSTANCE_FORMAT};

/// A sensing problem `y = A x̃ + η`, optionally with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    a: DenseMatrix,
    y: Vec<f64>,
    x_true: Option<Vec<f64>>,
    true_support: Option<Vec<usize>>,
    seed: u64,
    noise_std: f64,
}

impl ProblemInstance {
    pub fn new(
        a: DenseMatrix,
        y: Vec<f64>,
        x_true: Option<Vec<f64>>,
        seed: u64,
        noise_std: f64,
    ) -> Result<Self> {
        if y.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                context: "measurements y",
                expected: a.rows(),
                found: y.len(),
            });
        }
        if let Some(x) = &x_true {
            if x.len() != a.cols() {
                return Err(Error::DimensionMismatch {
                    context: "ground truth x_true",
                    expected: a.cols(),
                    found: x.len(),
                });
            }
        }
        if y.iter().chain(x_true.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "instance vectors must be finite".into(),
            ));
        }
        if !(noise_std >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise_std must be nonnegative, got {noise_std}"
            )));
        }
        let true_support = x_true.as_deref().map(|x| support(x, 0.0));
        Ok(Self {
            a,
            y,
            x_true,
            true_support,
            seed,
            noise_std,
        })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x_true(&self) -> Option<&[f64]> {
        self.x_true.as_deref()
    }

    /// Sorted indices where `|x̃ᵢ| > 0`.
    pub fn true_support(&self) -> Option<&[usize]> {
        self.true_support.as_deref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// `‖A x − y‖₂`.
    pub fn residual_norm(&self, x: &[f64]) -> Result<f64> {
        let ax = self.a.matvec(x)?;
        Ok(linalg::distance2(&ax, &self.y))
    }
}

/// Sorted indices with `|xᵢ| > zero_tol`.
pub fn support(x: &[f64], zero_tol: f64) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > zero_tol)
        .map(|(i, _)| i)
        .collect()
}

/// `τ = ‖A‖₂⁻²`, the largest stepsize covered by the descent analysis
/// (taken with equality).
pub fn recommended_tau(instance: &ProblemInstance) -> Result<f64> {
    let sigma = linalg::spectral_norm(
        instance.a(),
        linalg::DEFAULT_SPECTRAL_TOL,
        linalg::DEFAULT_SPECTRAL_MAX_ITERS,
    )?;
    Ok(1.0 / (sigma * sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    L1,
    Log,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::L1 => "l1",
            Family::Log => "log",
        })
    }
}

/// Penalty weights `α`, either shared or one per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weights {
    Scalar(f64),
    PerComponent(Vec<f64>),
}

impl Weights {
    fn expand(&self, n: usize) -> Result<Vec<f64>> {
        let alpha = match self {
            Weights::Scalar(a) => vec![*a; n],
            Weights::PerComponent(v) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        context: "per-component alpha",
                        expected: n,
                        found: v.len(),
                    });
                }
                v.clone()
            }
        };
        if let Some(bad) = alpha.iter().find(|a| !(**a >= 0.0) || !a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(alpha)
    }
}

impl From<f64> for Weights {
    fn from(a: f64) -> Self {
        Weights::Scalar(a)
    }
}

/// Penalty family, weights `α` and the derived per-component `λ = τα`.
///
/// For the log family, construction enforces `λᵢ < ε²` for every component:
/// outside that range the proximal map has no closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizerConfig {
    family: Family,
    alpha: Vec<f64>,
    epsilon: Option<f64>,
    tau: f64,
    lambda: Vec<f64>,
}

impl RegularizerConfig {
    /// `Σ αᵢ |xᵢ|` with stepsize `tau` over `n` components.
    pub fn lasso(alpha: impl Into<Weights>, tau: f64, n: usize) -> Result<Self> {
        Self::build(Family::L1, alpha.into(), None, tau, n)
    }

    /// `Σ αᵢ log(|xᵢ| + ε)` with stepsize `tau` over `n` components.
    pub fn log(alpha: impl Into<Weights>, epsilon: f64, tau: f64, n: usize) -> Result<Self> {
        Self::build(Family::Log, alpha.into(), Some(epsilon), tau, n)
    }

    fn build(
        family: Family,
        weights: Weights,
        epsilon: Option<f64>,
        tau: f64,
        n: usize,
    ) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "stepsize tau must be positive and finite, got {tau}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let alpha = weights.expand(n)?;
        let lambda: Vec<f64> = alpha.iter().map(|a| tau * a).collect();
        if let Some(eps) = epsilon {
            if !(eps > 0.0) || !eps.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "epsilon must be positive and finite, got {eps}"
                )));
            }
            let epsilon_sq = eps * eps;
            if let Some((index, &lambda)) =
                lambda.iter().enumerate().find(|(_, l)| **l >= epsilon_sq)
            {
                return Err(Error::LogPenaltyCondition {
                    index,
                    lambda,
                    epsilon_sq,
                });
            }
        }
        Ok(Self {
            family,
            alpha,
            epsilon,
            tau,
            lambda,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `ε` of the log family; `None` for ℓ1.
    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    /// Same weights and penalty, different stepsize.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::build(
            self.family,
            Weights::PerComponent(self.alpha.clone()),
            self.epsilon,
            tau,
            self.n(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Ista,
    Fista,
    AdIsta,
    AdFista,
    RwIsta,
    Admm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Ista,
        Algorithm::Fista,
        Algorithm::Admm,
        Algorithm::RwIsta,
        Algorithm::AdIsta,
        Algorithm::AdFista,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Ista => "ista",
            Algorithm::Fista => "fista",
            Algorithm::AdIsta => "ad-ista",
            Algorithm::AdFista => "ad-fista",
            Algorithm::RwIsta => "rw-ista",
            Algorithm::Admm => "admm",
        }
    }

    /// Display label, e.g. `AD-FISTA`.
    pub fn label(self) -> String {
        self.as_str().to_ascii_uppercase()
    }

    /// The penalty family whose objective the algorithm minimizes.
    pub fn family(self) -> Family {
        match self {
            Algorithm::Ista | Algorithm::Fista | Algorithm::Admm => Family::L1,
            Algorithm::AdIsta | Algorithm::AdFista | Algorithm::RwIsta => Family::Log,
        }
    }

    pub fn uses_momentum(self) -> bool {
        matches!(self, Algorithm::Fista | Algorithm::AdFista)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == norm)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown algorithm '{s}' (expected one of ista, fista, ad-ista, ad-fista, rw-ista, admm)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopKind {
    /// `‖x_{t+1} − x_t‖₂ / max(‖x_t‖₂, 1) < tol`.
    RelativeStep,
    /// `|F(x_{t+1}) − F(x_t)| / max(|F(x_t)|, 1) < tol`.
    ObjectiveChange,
    IterCapOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub kind: StopKind,
    pub tol: f64,
}

impl StoppingRule {
    pub const DEFAULT_TOL: f64 = 1e-8;

    pub fn relative_step(tol: f64) -> Self {
        Self {
            kind: StopKind::RelativeStep,
            tol,
        }
    }

    pub fn objective_change(tol: f64) -> Self {
        Self {
            kind: StopKind::ObjectiveChange,
            tol,
        }
    }

    pub fn iter_cap_only() -> Self {
        Self {
            kind: StopKind::IterCapOnly,
            tol: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tol >= 0.0 && self.tol.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "stopping tolerance must be finite and nonnegative, got {}",
                self.tol
            )))
        }
    }

    /// Decides convergence from one transition `x_prev → x_next`.
    pub fn is_met(&self, x_prev: &[f64], x_next: &[f64], f_prev: f64, f_next: f64) -> bool {
        match self.kind {
            StopKind::RelativeStep => {
                linalg::distance2(x_prev, x_next) / linalg::norm2(x_prev).max(1.0) < self.tol
            }
            StopKind::ObjectiveChange => (f_next - f_prev).abs() / f_prev.abs().max(1.0) < self.tol,
            StopKind::IterCapOnly => false,
        }
    }
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self::relative_step(Self::DEFAULT_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub tau: f64,
    pub max_iters: usize,
    pub stop: StoppingRule,
    /// ADMM penalty parameter; ignored by the other algorithms.
    pub rho: f64,
}

impl SolverConfig {
    pub const DEFAULT_MAX_ITERS: usize = 5000;
    pub const DEFAULT_RHO: f64 = 1.0;

    pub fn new(algorithm: Algorithm, tau: f64) -> Self {
        Self {
            algorithm,
            tau,
            max_iters: Self::DEFAULT_MAX_ITERS,
            stop: StoppingRule::default(),
            rho: Self::DEFAULT_RHO,
        }
    }

    /// Uses `τ = ‖A‖₂⁻²` for the given instance.
    pub fn recommended(algorithm: Algorithm, instance: &ProblemInstance) -> Result<Self> {
        Ok(Self::new(algorithm, recommended_tau(instance)?))
    }

    pub fn with_stop(mut self, stop: StoppingRule) -> Self {
        self.stop = stop;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "stepsize tau must be positive and finite, got {}",
                self.tau
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ADMM rho must be positive and finite, got {}",
                self.rho
            )));
        }
        self.stop.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ProblemInstance {
        let a = DenseMatrix::identity(2);
        ProblemInstance::new(a, vec![1.0, 0.0], Some(vec![1.0, 0.0]), 0, 0.0).unwrap()
    }

    #[test]
    fn instance_invariants() {
        let inst = tiny();
        assert_eq!(inst.true_support(), Some(&[0usize][..]));
        let a = DenseMatrix::identity(2);
        assert!(ProblemInstance::new(a.clone(), vec![1.0], None, 0, 0.0).is_err());
        assert!(ProblemInstance::new(a, vec![1.0, 2.0], Some(vec![1.0]), 0, 0.0).is_err());
    }

    #[test]
    fn recommended_tau_of_scaled_identity() {
        let inst = ProblemInstance::new(DenseMatrix::identity(3), vec![0.0; 3], None, 0, 0.0)
            .unwrap();
        assert!((recommended_tau(&inst).unwrap() - 1.0).abs() < 1e-12);
        let inst = ProblemInstance::new(
            DenseMatrix::identity(3).scaled(2.0),
            vec![0.0; 3],
            None,
            0,
            0.0,
        )
        .unwrap();
        assert!((recommended_tau(&inst).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn recommended_tau_rejects_zero_matrix() {
        let a = DenseMatrix::from_row_major(2, 2, vec![0.0; 4]).unwrap();
        let inst = ProblemInstance::new(a, vec![0.0; 2], None, 0, 0.0).unwrap();
        assert!(matches!(recommended_tau(&inst), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn log_regularizer_enforces_lambda_below_epsilon_squared() {
        // λ = τα = 0.5 · 2e-4 = 1e-4 = ε² exactly: rejected.
        let err = RegularizerConfig::log(2e-4, 1e-2, 0.5, 4).unwrap_err();
        assert!(matches!(err, Error::LogPenaltyCondition { index: 0, .. }));
        assert!(err.to_string().contains("lambda must be < epsilon^2"));
        let ok = RegularizerConfig::log(1.9e-4, 1e-2, 0.5, 4).unwrap();
        assert!(ok.lambda().iter().all(|l| (l - 0.95e-4).abs() < 1e-18));

        let per = Weights::PerComponent(vec![0.0, 1e-4, 3e-4]);
        let err = RegularizerConfig::log(per, 1e-2, 0.5, 3).unwrap_err();
        assert!(matches!(err, Error::LogPenaltyCondition { index: 2, .. }));
    }

    #[test]
    fn regularizer_validation() {
        assert!(RegularizerConfig::lasso(-1.0, 1.0, 3).is_err());
        assert!(RegularizerConfig::lasso(1.0, 0.0, 3).is_err());
        assert!(RegularizerConfig::log(1.0, 0.0, 1e-3, 3).is_err());
        assert!(RegularizerConfig::lasso(Weights::PerComponent(vec![1.0]), 1.0, 3).is_err());
        let r = RegularizerConfig::lasso(2.0, 0.25, 3).unwrap();
        assert_eq!(r.lambda(), &[0.5, 0.5, 0.5]);
        assert_eq!(r.epsilon(), None);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for alg in Algorithm::ALL {
            assert_eq!(alg.as_str().parse::<Algorithm>().unwrap(), alg);
            let json = serde_json::to_string(&alg).unwrap();
            assert_eq!(json, format!("\"{}\"", alg.as_str()));
        }
        assert_eq!("AD_FISTA".parse::<Algorithm>().unwrap(), Algorithm::AdFista);
        assert!("lista".parse::<Algorithm>().is_err());
    }

    #[test]
    fn stopping_rules() {
        let rule = StoppingRule::relative_step(1e-3);
        assert!(rule.is_met(&[10.0], &[10.001], 0.0, 0.0));
        assert!(!rule.is_met(&[0.0], &[0.01], 0.0, 0.0));
        let rule = StoppingRule::objective_change(1e-6);
        assert!(rule.is_met(&[], &[], 2.0, 2.0 + 1e-7));
        assert!(!StoppingRule::iter_cap_only().is_met(&[1.0], &[1.0], 0.0, 0.0));
        assert!(StoppingRule::relative_step(-1.0).validate().is_err());
    }

    #[test]
    fn solver_config_validation() {
        assert!(SolverConfig::new(Algorithm::Ista, 0.1).validate().is_ok());
        assert!(SolverConfig::new(Algorithm::Ista, -0.1).validate().is_err());
        assert!(SolverConfig::new(Algorithm::Admm, 0.1)
            .with_rho(0.0)
            .validate()
            .is_err());
        assert!(SolverConfig::new(Algorithm::Ista, 0.1)
            .with_max_iters(0)
            .validate()
            .is_err());
    }
}
