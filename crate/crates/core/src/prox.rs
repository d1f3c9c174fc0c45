//! Componentwise shrinkage-thresholding operators.
//!
//! All operators here are instances of
//!
//! ```text
//!            ⎧ zᵢ − sᵢ   if zᵢ >  θᵢ
//! S_{θ,s}(z)ᵢ = ⎨ zᵢ + sᵢ   if zᵢ < −θᵢ
//!            ⎩ 0         otherwise
//! ```
//!
//! with threshold `θ` and shrinkage `s`. Soft thresholding uses `θ = s = λ`.
//! The proximal map of `λ log(|x| + ε)` uses `θ = λ/ε` and the adaptive
//! shrinkage `s = γ(z)`, which decreases as `|z|` grows.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Threshold (half-width of the zeroing band) and shrinkage of one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkThresholdParams {
    pub threshold: f64,
    pub shrink: f64,
}

impl ShrinkThresholdParams {
    pub fn new(threshold: f64, shrink: f64) -> Result<Self> {
        let p = Self { threshold, shrink };
        p.validate()?;
        Ok(p)
    }

    /// `θ = s = λ`.
    pub fn soft(lambda: f64) -> Result<Self> {
        Self::new(lambda, lambda)
    }

    pub fn validate(&self) -> Result<()> {
        if self.threshold >= 0.0 && self.shrink >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "threshold and shrink must be nonnegative, got ({}, {})",
                self.threshold, self.shrink
            )))
        }
    }
}

/// `S_{θ,s}(z)` for one component. The boundary `|z| = θ` maps to zero.
#[inline]
pub fn shrink_threshold_scalar(z: f64, threshold: f64, shrink: f64) -> f64 {
    if z > threshold {
        z - shrink
    } else if z < -threshold {
        z + shrink
    } else {
        0.0
    }
}

/// `sign(z)·max(|z| − λ, 0)`.
#[inline]
pub fn soft_threshold_scalar(z: f64, lambda: f64) -> f64 {
    shrink_threshold_scalar(z, lambda, lambda)
}

fn check_lengths(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

pub fn shrink_threshold(z: &[f64], params: &[ShrinkThresholdParams]) -> Result<Vec<f64>> {
    check_lengths("shrink-threshold params", z.len(), params.len())?;
    params.iter().try_for_each(ShrinkThresholdParams::validate)?;
    Ok(z
        .iter()
        .zip(params)
        .map(|(&zi, p)| shrink_threshold_scalar(zi, p.threshold, p.shrink))
        .collect())
}

pub fn soft_threshold(z: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
    check_lengths("soft-threshold lambda", z.len(), lambda.len())?;
    if let Some(bad) = lambda.iter().find(|l| !(**l >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "soft threshold needs lambda >= 0, got {bad}"
        )));
    }
    Ok(z
        .iter()
        .zip(lambda)
        .map(|(&zi, &li)| soft_threshold_scalar(zi, li))
        .collect())
}

/// Checks `0 ≤ λ < ε²` (and `ε > 0`), the range where the log prox is a
/// single-valued closed form.
pub fn check_log_condition(lambda: &[f64], epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let epsilon_sq = epsilon * epsilon;
    for (index, &l) in lambda.iter().enumerate() {
        if !(l >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be nonnegative, got {l} at component {index}"
            )));
        }
        if l >= epsilon_sq {
            return Err(Error::LogPenaltyCondition {
                index,
                lambda: l,
                epsilon_sq,
            });
        }
    }
    Ok(())
}

/// Adaptive shrinkage `γ(z) = (|z| + ε − √((|z| + ε)² − 4λ)) / 2`.
///
/// Evaluated as `2λ / (|z| + ε + √((|z| + ε)² − 4λ))`, which is the same
/// quantity without the cancellation at large `|z|`. Callers must ensure the
/// discriminant is nonnegative; outside the zeroing band (`|z| > λ/ε`) it is
/// whenever `λ < ε²`.
#[inline]
pub(crate) fn gamma_unchecked(z: f64, lambda: f64, epsilon: f64) -> f64 {
    let a = z.abs() + epsilon;
    2.0 * lambda / (a + (a * a - 4.0 * lambda).sqrt())
}

/// Checked [`gamma_unchecked`]. Lies in `(0, λ/ε]` for `|z| ≥ λ/ε`, with
/// equality at the band edge.
pub fn gamma(z: f64, lambda: f64, epsilon: f64) -> Result<f64> {
    check_log_condition(&[lambda], epsilon)?;
    let a = z.abs() + epsilon;
    let disc = a * a - 4.0 * lambda;
    if disc < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "negative discriminant {disc:e} in shrinkage for z = {z}"
        )));
    }
    Ok(gamma_unchecked(z, lambda, epsilon))
}

/// Proximal map of `λ log(|x| + ε)` at one component (requires `λ < ε²`).
#[inline]
pub fn prox_log_scalar(z: f64, lambda: f64, epsilon: f64) -> f64 {
    let threshold = lambda / epsilon;
    if z.abs() <= threshold {
        0.0
    } else {
        let g = gamma_unchecked(z, lambda, epsilon);
        shrink_threshold_scalar(z, threshold, g)
    }
}

/// `argmin_x Σ λᵢ log(|xᵢ| + ε) + ½‖x − z‖₂²`, componentwise.
pub fn prox_log(z: &[f64], lambda: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    check_lengths("log-prox lambda", z.len(), lambda.len())?;
    check_log_condition(lambda, epsilon)?;
    Ok(z
        .iter()
        .zip(lambda)
        .map(|(&zi, &li)| prox_log_scalar(zi, li, epsilon))
        .collect())
}

/// The `(λ/ε, γ(z))` pairs at which `S_{θ,s}(z)` equals the log prox.
///
/// Inside the zeroing band the shrinkage is irrelevant and set to the
/// threshold.
pub fn log_shrink_params(
    z: &[f64],
    lambda: &[f64],
    epsilon: f64,
) -> Result<Vec<ShrinkThresholdParams>> {
    check_lengths("log-prox lambda", z.len(), lambda.len())?;
    check_log_condition(lambda, epsilon)?;
    Ok(z
        .iter()
        .zip(lambda)
        .map(|(&zi, &li)| {
            let threshold = li / epsilon;
            let shrink = if zi.abs() > threshold {
                gamma_unchecked(zi, li, epsilon)
            } else {
                threshold
            };
            ShrinkThresholdParams { threshold, shrink }
        })
        .collect())
}
