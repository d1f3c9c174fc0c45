//! Proximal-gradient solvers for sparse recovery.
//!
//! The crate covers two problem families over a dense sensing matrix `A`:
//!
//! ```text
//! Lasso:      F(x) = ½‖Ax − y‖₂² + Σ αᵢ |xᵢ|
//! Log-Lasso:  F(x) = ½‖Ax − y‖₂² + Σ αᵢ log(|xᵢ| + ε)
//! ```
//!
//! and six iterative algorithms: ISTA, FISTA and ADMM for the Lasso, and
//! AD-ISTA, AD-FISTA and RW-ISTA for the log-penalized problem. AD-ISTA is the
//! proximal gradient method applied to Log-Lasso; its proximal map is a
//! shrinkage-thresholding operator whose shrinkage adapts to the magnitude of
//! each component (see [`prox::prox_log`]).
//!
//! Modules:
//! - [`linalg`]: dense matrix, matvecs, power-iteration spectral norm, Cholesky.
//! - [`model`]: problem instances, regularizer and solver configuration,
//!   synthetic instance generation and the instance file format.
//! - [`prox`]: soft thresholding, the closed-form log prox, and the generalized
//!   shrinkage-thresholding operator.
//! - [`solvers`]: objectives, the surrogate functional, per-algorithm steps and
//!   the [`solvers::run`] driver.
//! - [`bench`]: randomized benchmark batches, aggregate statistics and trace
//!   export.

pub mod bench;
pub mod linalg;
pub mod model;
pub mod prox;
pub mod solvers;

mod error;

pub use error::{Error, Result};
