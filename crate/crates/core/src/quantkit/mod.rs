//! Density-matrix calculus.
//!
//! Von Neumann entropies, partial traces, purification, and — the part
//! everything downstream leans on — *marginal eigenvalues with their
//! provenance*. For a joint state the eigenvalue distribution over joint
//! indices is marginalized like a classical probability vector; the
//! result generally differs from the spectrum of the reduced matrix, and
//! the bridge functions below depend on that distinction.
//!
//! # Eigenvalue-to-index convention
//!
//! A spectrum by itself carries no joint-index labels, so this crate
//! fixes one deterministic assignment and uses it everywhere:
//!
//! 1. eigenpairs are processed in order of descending eigenvalue (ties:
//!    larger best-basis overlap first, then smaller preferred index,
//!    then solver order);
//! 2. each eigenpair claims the still-free joint index (enumerated
//!    lexicographically in factor order) where its eigenvector has the
//!    largest squared overlap with the computational basis, smallest
//!    index on ties.
//!
//! For a diagonal matrix every eigenvector *is* a basis vector, so the
//! assignment is the natural one and marginal eigenvalues coincide with
//! the reduced matrix's diagonal — the classical case. For entangled
//! states the two sides genuinely differ (a Bell pair assigns its single
//! unit eigenvalue to one corner while the reduced state is maximally
//! mixed). Downstream bridge values depend on this convention.

mod bridge;
mod density;
mod eigen;

pub use bridge::{bridge_cmi, bridge_mi};
pub use density::DensityMatrix;
pub use eigen::{EigenSystem, Isometry, Purification};

use thiserror::Error;

use crate::probkit::ProbError;

/// Hermiticity / trace tolerance at construction.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_TOL, 0)` are clipped to zero; anything lower is
/// rejected.
pub const PSD_TOL: f64 = 1e-10;
/// Isometry defect tolerance.
pub const ISOMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum QuantError {
    #[error("matrix is {rows}x{cols}, expected {dim}x{dim} for the declared factors")]
    DimensionMismatch { rows: usize, cols: usize, dim: usize },
    #[error("matrix is not Hermitian (max |M - M^H| entry = {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue = {0:.3e})")]
    NotPositive(f64),
    #[error("trace is {0:.17}, not 1")]
    TraceNotOne(f64),
    #[error("unknown factor `{0}`")]
    UnknownFactor(String),
    #[error("factor sets must partition the state; `{0}` is missing or repeated")]
    BadPartition(String),
    #[error("map is not an isometry (max |A^H A - I| entry = {0:.3e})")]
    NotIsometry(f64),
    #[error("state and distribution have different factor structure at `{0}`")]
    FactorMismatch(String),
    #[error("type has {got} symbols, the joint alphabet has {expected}")]
    TypeSizeMismatch { got: usize, expected: usize },
    #[error("probability is zero at `{symbol}` (marginal `{marginal}`) where the type has weight; bridge value undefined")]
    ZeroProbability { symbol: String, marginal: String },
    #[error(transparent)]
    Prob(#[from] ProbError),
}

pub type Result<T> = std::result::Result<T, QuantError>;
