//! Rate-region construction and secrecy-capacity optimization.
//!
//! For a fixed wiretap channel and an auxiliary model (a prior on `u`, a
//! kernel `v|u`, and an encoder kernel `x|v`), the achievable rate
//! triples `(r_e, r_s, r_t)` form a polytope cut out by one-letter
//! informations:
//!
//! ```text
//! 0 <= r_e <= r_s,  0 <= r_t
//! r_e       <= I(y:v|u) - I(z:v|u)
//! r_s + r_t <= I(y:v|u) + ell
//! r_t       <= ell,   ell = min(I(y:u), I(z:u))
//! ```
//!
//! The same shape holds for density matrices with von Neumann
//! informations. Unions over sampled auxiliaries, convex-hull vertex
//! extraction, the general-to-factored replacement, time-shared
//! mixtures, and the two capacity optimizers live here too.

mod capacity;
mod constraints;
mod hull;
mod sampling;

pub use capacity::{channel_coding_capacity, secrecy_capacity, CapacityResult, OptimizerConfig};
pub use constraints::{
    constraints_classical, constraints_quantum, factor_outputs, AuxiliaryModel, ConstraintSource,
    QuantumAuxiliary, RatePoint, RegionConstraints, ReservoirSpec,
};
pub use hull::{extreme_points, polytope_vertices};
pub use sampling::{sample_region, RegionSample, SamplerConfig};

use thiserror::Error;

use crate::netkit::NetError;
use crate::probkit::ProbError;
use crate::quantkit::QuantError;

/// Membership slack: regions are closed, so boundary points pass.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("rate point violates {0}")]
    InvalidRate(String),
    #[error("auxiliary model does not compose: {0}")]
    Composition(String),
    #[error("{0}")]
    BadConfig(String),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Quant(#[from] QuantError),
    #[error(transparent)]
    Net(#[from] NetError),
}

pub type Result<T> = std::result::Result<T, RegionError>;
