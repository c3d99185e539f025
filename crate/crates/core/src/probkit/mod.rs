//! Finite-alphabet probability calculus.
//!
//! Joint distributions over named, labeled axes; channels (row-stochastic
//! conditional kernels); empirical types of sequences; and the classical
//! information measures the rest of the crate is built on. All information
//! is measured in nats.
//!
//! Everything here is an immutable value after construction and every
//! operation is a pure function, so concurrent use needs no synchronization.
//!
//! Conventions that the other modules rely on:
//!
//! * weights are stored row-major in lexicographic order of the axes, first
//!   axis most significant;
//! * marginalization and information queries are name-based, never
//!   position-based;
//! * `0 ln 0 = 0` is enforced by branching on zero, not by flooring with an
//!   epsilon;
//! * construction rejects (rather than renormalizes) vectors that are off
//!   normalization by more than `NORM_TOL`.

mod alphabet;
mod channel;
mod dist;
mod info;
mod ptype;

pub use alphabet::{Alphabet, Axis};
pub use channel::Channel;
pub use dist::{joint_from_factors, Dist, Factor};
pub use info::{
    conditional_entropy, conditional_mutual_information, entropy_of, mutual_information, sigma_gt,
    sigma_lt, EntropySource,
};
pub use ptype::{ptype_of, ptype_of_indices, PType};

use thiserror::Error;

/// Normalization tolerance for distributions and channel rows.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("alphabet must have at least one symbol")]
    EmptyAlphabet,
    #[error("duplicate symbol label `{0}` in alphabet")]
    DuplicateLabel(String),
    #[error("duplicate axis name `{0}`")]
    DuplicateAxis(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable sets must be disjoint; `{0}` appears twice")]
    OverlappingVariables(String),
    #[error("weight vector has length {got}, expected {expected}")]
    WeightLength { got: usize, expected: usize },
    #[error("negative weight {value:.3e} at index {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weights sum to {sum:.17} which is off 1 by more than {tol:.1e}")]
    NotNormalized { sum: f64, tol: f64 },
    #[error("channel row {row} sums to {sum:.17} which is off 1 by more than {tol:.1e}")]
    RowNotNormalized { row: usize, sum: f64, tol: f64 },
    #[error("factor for `{var}` expects parent alphabet of size {expected}, got {got}")]
    AlphabetMismatch { var: String, expected: usize, got: usize },
    #[error("parent `{parent}` of `{var}` is not defined by an earlier factor (wiring must be acyclic and ordered)")]
    UnorderedWiring { var: String, parent: String },
    #[error("symbol `{0}` is not in the alphabet")]
    OutOfAlphabet(String),
    #[error("symbol index {index} out of range for alphabet of size {size}")]
    SymbolIndex { index: usize, size: usize },
    #[error("empty sequence has no type")]
    EmptySequence,
    #[error("per-letter blocks have mismatched lengths ({y} vs {z})")]
    MismatchedBlocks { y: usize, z: usize },
}

pub type Result<T> = std::result::Result<T, ProbError>;
