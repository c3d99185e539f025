//! Executable residual checks for the chain-rule identity family.
//!
//! Each check evaluates both sides of one identity (or the slack of one
//! inequality) on a concrete joint state and reports the residual. The
//! checks are written against [`EntropySource`], so the same code runs
//! with Shannon entropies on classical joints and von Neumann entropies
//! on density matrices — the two cases are supposed to satisfy identical
//! chain-rule *identities*, and the suite makes that claim executable.
//!
//! The block-structured checks operate on a [`WiretapModel`]: a joint
//! state over a secret message `s`, a shared message `t`, and per-letter
//! receiver/eavesdropper blocks `y_1..y_n`, `z_1..z_n`. The mixed
//! past/future window `alpha_j = (y_{<j}, z_{>j})` is formed internally.
//!
//! Equality residuals scale with `n` (error accumulates across the
//! per-letter sums), so tolerances here are given per letter and
//! multiplied by `n`.

mod checks;
mod model;
mod suite;

pub use checks::{
    check_block_cmi_decomposition, check_block_mi_decomposition, check_cmi_le_mi,
    check_cross_block_difference, check_delta_identities, check_markov_mi_difference,
    check_mi_swap, check_rate_identities, check_sigma_equality, check_two_parents,
};
pub use model::{ModelState, WiretapModel};
pub use suite::{random_classical_model, random_quantum_model, run_suite, SuiteConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::probkit::{EntropySource, ProbError};

/// Default equality tolerance per letter.
pub const EQUALITY_TOL: f64 = 1e-9;
/// Default inequality slack tolerance.
pub const SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum IdentityError {
    #[error("state does not carry block `{0}`")]
    MissingBlock(String),
    #[error("per-letter blocks must have equal length (y: {y}, z: {z})")]
    BlockLength { y: usize, z: usize },
    #[error("blocks must be disjoint; `{0}` appears twice")]
    OverlappingBlocks(String),
    #[error("a wiretap model needs n >= 1")]
    EmptyBlocks,
    #[error("not a Markov chain through the middle variable: H(a:b|e) = {cmi:.3e} > {tol:.1e}")]
    MarkovPrecondition { cmi: f64, tol: f64 },
    #[error(transparent)]
    Prob(#[from] ProbError),
}

pub type Result<T> = std::result::Result<T, IdentityError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Equality,
    Inequality,
}

/// Outcome of one identity check: both sides, the residual, and the
/// verdict at the tolerance it was run with. The generator seed and case
/// index ride along so any report can be reproduced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs|` for equalities; the violation `max(0, rhs - lhs)`
    /// for inequalities (`lhs >= rhs` is the claim). Always nonnegative.
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<usize>,
}

impl IdentityReport {
    pub fn equality(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = (lhs - rhs).abs();
        Self {
            name: name.into(),
            kind: CheckKind::Equality,
            lhs,
            rhs,
            residual,
            tolerance,
            passed: residual <= tolerance,
            seed: None,
            case: None,
        }
    }

    /// Inequality claim `value >= bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64, tolerance: f64) -> Self {
        let residual = (bound - value).max(0.0);
        Self {
            name: name.into(),
            kind: CheckKind::Inequality,
            lhs: value,
            rhs: bound,
            residual,
            tolerance,
            passed: residual <= tolerance,
            seed: None,
            case: None,
        }
    }

    pub fn tagged(mut self, seed: u64, case: usize) -> Self {
        self.seed = Some(seed);
        self.case = Some(case);
        self
    }

    /// One JSON line, the suite's output format.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub(crate) fn entropy<S: EntropySource + ?Sized>(state: &S, vars: &[&str]) -> Result<f64> {
    Ok(state.entropy_of(vars)?)
}
