//! Capacity regions for classical and quantum wiretap channels.
//!
//! A wiretap channel carries an input `x` to a pair of outputs: `y` for
//! the legitimate receiver and `z` for an eavesdropper. This crate
//! computes and empirically certifies the three-dimensional region of
//! achievable rate triples (equivocation, secret rate, tapped rate) that
//! characterizes such channels through one-letter informations, for both
//! probability kernels and density matrices.
//!
//! The pieces:
//!
//! * [`probkit`] — finite-alphabet distributions, channels, empirical
//!   types, and the classical information measures (all in nats);
//! * [`quantkit`] — density matrices, von Neumann entropies, marginal
//!   eigenvalues with their provenance, and the eigenvalue bridge
//!   functions that interpolate classical information densities;
//! * [`netkit`] — classical and quantum Bayesian-network evaluation with
//!   reservoir (traced-node) algebra;
//! * [`identities`] — executable residual checks for the chain-rule
//!   identity family behind the converse proofs, runnable against both
//!   Shannon and von Neumann entropies;
//! * [`region`] — rate-region constraints, membership, sampling, and
//!   secrecy-capacity optimization;
//! * [`simulate`] — random-coding experiments with the five-way
//!   threshold decoder and exact equivocation for desk-scale instances;
//! * [`cli`] — the `wiretap` command-line front end.
//!
//! Everything is deterministic given seeds, and all public types are
//! immutable values, safe to share across threads.

pub mod cli;
pub mod identities;
pub mod netkit;
pub mod probkit;
pub mod seeding;
pub mod quantkit;
pub mod region;
pub mod simulate;
pub mod testutil;
