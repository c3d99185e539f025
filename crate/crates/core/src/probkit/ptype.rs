use serde::{Deserialize, Serialize};

use super::alphabet::{Alphabet, Axis};
use super::dist::Dist;
use super::{ProbError, Result};

/// The empirical type of a length-`n` sequence over a base alphabet
/// (possibly a product alphabet): occurrence counts per symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PType {
    base: Alphabet,
    counts: Vec<u64>,
    n: usize,
}

impl PType {
    pub fn new(base: Alphabet, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != base.size() {
            return Err(ProbError::WeightLength { got: counts.len(), expected: base.size() });
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(ProbError::EmptySequence);
        }
        Ok(Self { base, counts, n: n as usize })
    }

    pub fn base(&self) -> &Alphabet {
        &self.base
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Empirical frequencies `counts / n`.
    pub fn freqs(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n as f64).collect()
    }

    /// The induced distribution on a single axis carrying the base
    /// alphabet.
    pub fn as_dist(&self, axis_name: &str) -> Result<Dist> {
        Dist::new(vec![Axis::new(axis_name, self.base.clone())], self.freqs())
    }
}

/// Tallies a sequence of symbol labels.
pub fn ptype_of(sequence: &[&str], base: &Alphabet) -> Result<PType> {
    if sequence.is_empty() {
        return Err(ProbError::EmptySequence);
    }
    let mut counts = vec![0u64; base.size()];
    for s in sequence {
        counts[base.index_of(s)?] += 1;
    }
    PType::new(base.clone(), counts)
}

/// Tallies a sequence of symbol indices into the base alphabet.
pub fn ptype_of_indices(sequence: &[usize], base: &Alphabet) -> Result<PType> {
    if sequence.is_empty() {
        return Err(ProbError::EmptySequence);
    }
    let mut counts = vec![0u64; base.size()];
    for &s in sequence {
        if s >= base.size() {
            return Err(ProbError::SymbolIndex { index: s, size: base.size() });
        }
        counts[s] += 1;
    }
    PType::new(base.clone(), counts)
}
