//! Space-time proper orthogonal decomposition for a 1D linear parabolic problem.
//!
//! The crate solves the heat equation on the unit space-time square with a
//! tensor-product P1 Galerkin discretization (the full-order model), computes
//! optimal low-rank bases in space and time from the solution's coefficient
//! matrix, modifies the time basis so the initial condition stays exactly
//! representable, solves the reduced-order model, and evaluates the
//! singular-value error bounds that relate the two.
//!
//! Modules follow the pipeline:
//! - [`grid`]: uniform 1D grids and the P1 mass/stiffness/advection Gramians
//! - [`field`]: coefficient matrices of space-time functions and their norms
//! - [`pod`]: weighted SVD, reduced bases, and the space/time projections
//! - [`solver`]: full-order and reduced-order Galerkin solves
//! - [`error`]: error quantities, singular-value bounds, and bound checks
//! - [`experiment`]: experiment configuration, sweeps, and CSV output

pub mod error;
pub mod experiment;
pub mod field;
pub mod grid;
pub mod linalg;
pub mod pod;
pub mod quad;
pub mod solver;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum StpodError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("SVD did not converge")]
    SvdFailed,
    #[error("point ({tau}, {xi}) outside the space-time domain")]
    OutOfDomain { tau: f64, xi: f64 },
    #[error("invalid basis index {index} for {n_active} active functions")]
    InvalidBasisIndex { index: usize, n_active: usize },
    #[error("invalid reduction dimension: {0}")]
    InvalidReduction(String),
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed file {path}: {reason}")]
    Malformed { path: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, StpodError>;
