use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The log-penalty prox has a closed form only when `λᵢ < ε²`.
    #[error(
        "lambda must be < epsilon^2 for the log penalty: component {index} has \
         lambda = {lambda:e}, epsilon^2 = {epsilon_sq:e}"
    )]
    LogPenaltyCondition {
        index: usize,
        lambda: f64,
        epsilon_sq: f64,
    },

    #[error("matrix is zero; spectral norm is undefined")]
    ZeroMatrix,

    #[error("power iteration did not converge within {iters} iterations")]
    NoConvergence { iters: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("regularizer family mismatch: {algorithm} requires {expected}")]
    FamilyMismatch {
        algorithm: &'static str,
        expected: &'static str,
    },

    #[error("{0} state is not initialized")]
    Uninitialized(&'static str),

    #[error("non-finite value in iterate at iteration {iter}")]
    NonFinite { iter: usize },

    #[error("instance has no ground truth")]
    MissingGroundTruth,

    #[error("malformed instance file: {0}")]
    MalformedFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by invalid user input rather than a failed
    /// computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidParameter(_)
                | Error::LogPenaltyCondition { .. }
                | Error::FamilyMismatch { .. }
                | Error::MissingGroundTruth
                | Error::MalformedFile(_)
        )
    }
}
