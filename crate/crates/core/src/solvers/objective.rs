use crate::linalg::{self, DenseMatrix};
use crate::model::{Family, ProblemInstance, RegularizerConfig};
use crate::{Error, Result};

fn check_n(x: &[f64], instance: &ProblemInstance, reg: &RegularizerConfig) -> Result<()> {
    if x.len() != instance.n() {
        return Err(Error::DimensionMismatch {
            context: "iterate",
            expected: instance.n(),
            found: x.len(),
        });
    }
    if reg.n() != instance.n() {
        return Err(Error::DimensionMismatch {
            context: "regularizer weights",
            expected: instance.n(),
            found: reg.n(),
        });
    }
    Ok(())
}

/// `Σ αᵢ r(xᵢ)` for the regularizer's family.
pub fn penalty(x: &[f64], reg: &RegularizerConfig) -> f64 {
    let alpha = reg.alpha();
    match reg.epsilon() {
        None => x.iter().zip(alpha).map(|(xi, a)| a * xi.abs()).sum(),
        Some(eps) => x
            .iter()
            .zip(alpha)
            .map(|(xi, a)| a * (xi.abs() + eps).ln())
            .sum(),
    }
}

/// `½‖r‖₂² + Σ αᵢ r(xᵢ)` given the residual `r = Ax − y`.
pub(crate) fn objective_from_residual(residual: &[f64], x: &[f64], reg: &RegularizerConfig) -> f64 {
    0.5 * linalg::dot(residual, residual) + penalty(x, reg)
}

fn residual(a: &DenseMatrix, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let mut r = a.matvec(x)?;
    r.iter_mut().zip(y).for_each(|(ri, yi)| *ri -= yi);
    Ok(r)
}

/// `F(x)` for whichever family `reg` carries.
pub fn objective(x: &[f64], instance: &ProblemInstance, reg: &RegularizerConfig) -> Result<f64> {
    check_n(x, instance, reg)?;
    let r = residual(instance.a(), x, instance.y())?;
    Ok(objective_from_residual(&r, x, reg))
}

/// `½‖Ax − y‖₂² + Σ αᵢ |xᵢ|`.
pub fn objective_lasso(x: &[f64], instance: &ProblemInstance, reg: &RegularizerConfig) -> Result<f64> {
    if reg.family() != Family::L1 {
        return Err(Error::FamilyMismatch {
            algorithm: "lasso objective",
            expected: "l1",
        });
    }
    objective(x, instance, reg)
}

/// `½‖Ax − y‖₂² + Σ αᵢ log(|xᵢ| + ε)`; negative values are possible when `ε < 1`.
pub fn objective_loglasso(
    x: &[f64],
    instance: &ProblemInstance,
    reg: &RegularizerConfig,
) -> Result<f64> {
    if reg.family() != Family::Log {
        return Err(Error::FamilyMismatch {
            algorithm: "log-lasso objective",
            expected: "log",
        });
    }
    objective(x, instance, reg)
}

/// Surrogate functional `S(x, ζ) = F(x) + (1/2τ)‖x − ζ‖₂² − ½‖Ax − Aζ‖₂²`,
/// with `τ` taken from `reg`.
///
/// For `τ < ‖A‖₂⁻²` it majorizes `F` and touches it only at `x = ζ`.
pub fn surrogate(
    x: &[f64],
    zeta: &[f64],
    instance: &ProblemInstance,
    reg: &RegularizerConfig,
) -> Result<f64> {
    check_n(zeta, instance, reg)?;
    let f = objective(x, instance, reg)?;
    let diff: Vec<f64> = x.iter().zip(zeta).map(|(a, b)| a - b).collect();
    let a_diff = instance.a().matvec(&diff)?;
    let tau = reg.tau();
    Ok(f + linalg::dot(&diff, &diff) / (2.0 * tau) - 0.5 * linalg::dot(&a_diff, &a_diff))
}
