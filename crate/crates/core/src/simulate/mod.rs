//! Random-coding experiments for the classical achievability protocol.
//!
//! A codebook is three tiers of per-letter i.i.d. words: `u^n(t)` for
//! the shared message, `v^n(s,t)` drawn letter-wise from `P(v|u)`, and
//! `x^n(s,t)` from `P(x|v)`. Transmission is memoryless through the
//! wiretap kernel, and decoding runs five families of threshold tests
//! on per-letter information densities — one family per message
//! component group, each compared against its rate.
//!
//! Scores use explicit infinities and never NaN: a hypothesis that
//! cannot explain the observation scores `-inf` (and fails its own
//! tests); a competitor that cannot explain it pushes the pairwise
//! ratio to `+inf` (and the test passes trivially). A zero probability
//! at an *observed* symbol whose marginals make the density undefined
//! is reported as an error with its location, not patched.
//!
//! Everything is seeded and bit-reproducible; Monte Carlo trials derive
//! per-trial generators with [`crate::seeding::derive_seed`], so
//! parallel and serial sweeps agree.

mod codebook;
mod decoder;
mod equivocation;
mod montecarlo;
mod scores;

pub use codebook::{build_codebook, transmit, Codebook};
pub use decoder::{accepted_candidates, decode, DecodeOutcome, DecoderConfig, Verdict};
pub use equivocation::exact_equivocation;
pub use montecarlo::{estimate_error, ErrorEstimate, MonteCarloConfig, TrialRecord};
pub use scores::{gamma_scores, GammaScores, HypothesisScores, SingleLetterLaw};

use thiserror::Error;

use crate::probkit::ProbError;
use crate::region::RegionError;

/// State-space cap for the exact equivocation enumerator.
pub const EQUIVOCATION_CAP: usize = 10_000_000;
/// Largest message count `round(exp(n r))` may produce before explicit
/// counts are required.
pub const MESSAGE_COUNT_CAP: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("message index ({s}, {t}) out of range for ({n_s}, {n_t})")]
    MessageRange { s: usize, t: usize, n_s: usize, n_t: usize },
    #[error("codebook word has length {got}, expected {expected}")]
    WordLength { got: usize, expected: usize },
    #[error("codebook symbol {symbol} out of range for alphabet of size {size}")]
    SymbolRange { symbol: usize, size: usize },
    #[error("zero single-letter probability for {role} at letter {letter} (symbol {symbol}); information density undefined")]
    ZeroProbability { role: &'static str, letter: usize, symbol: String },
    #[error("implied message count exp({0:.3}) exceeds the cap; pass explicit counts")]
    MessageCountCap(f64),
    #[error("equivocation state space {0} exceeds the enumeration cap")]
    EquivocationCap(usize),
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("{0}")]
    BadConfig(String),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

pub type Result<T> = std::result::Result<T, SimError>;
