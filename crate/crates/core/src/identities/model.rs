use crate::probkit::{Dist, EntropySource, Result as ProbResult};
use crate::quantkit::DensityMatrix;

use super::{IdentityError, Result};

/// The joint state a wiretap model is evaluated on.
#[derive(Debug, Clone)]
pub enum ModelState {
    Classical(Dist),
    Quantum(DensityMatrix),
}

impl EntropySource for ModelState {
    fn variable_names(&self) -> Vec<String> {
        match self {
            ModelState::Classical(d) => d.variable_names(),
            ModelState::Quantum(r) => r.variable_names(),
        }
    }

    fn entropy_of(&self, vars: &[&str]) -> ProbResult<f64> {
        match self {
            ModelState::Classical(d) => d.entropy_of(vars),
            ModelState::Quantum(r) => r.entropy_of(vars),
        }
    }
}

/// A joint state over message blocks `s`, `t` and per-letter output
/// blocks `y_1..y_n`, `z_1..z_n` (an optional encoder block `x_1..x_n`
/// may ride along but no check uses it).
#[derive(Debug, Clone)]
pub struct WiretapModel {
    state: ModelState,
    s: String,
    t: String,
    y: Vec<String>,
    z: Vec<String>,
}

impl WiretapModel {
    pub fn new(
        state: ModelState,
        s: impl Into<String>,
        t: impl Into<String>,
        y: Vec<String>,
        z: Vec<String>,
    ) -> Result<Self> {
        if y.is_empty() {
            return Err(IdentityError::EmptyBlocks);
        }
        if y.len() != z.len() {
            return Err(IdentityError::BlockLength { y: y.len(), z: z.len() });
        }
        let s = s.into();
        let t = t.into();
        let names = state.variable_names();
        let mut seen: Vec<&String> = Vec::new();
        for block in std::iter::once(&s).chain(std::iter::once(&t)).chain(&y).chain(&z) {
            if !names.contains(block) {
                return Err(IdentityError::MissingBlock(block.clone()));
            }
            if seen.contains(&block) {
                return Err(IdentityError::OverlappingBlocks(block.clone()));
            }
            seen.push(block);
        }
        Ok(Self { state, s, t, y, z })
    }

    pub fn state(&self) -> &ModelState {
        &self.state
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn secret(&self) -> &str {
        &self.s
    }

    pub fn shared(&self) -> &str {
        &self.t
    }

    pub fn y_block(&self) -> Vec<&str> {
        self.y.iter().map(String::as_str).collect()
    }

    pub fn z_block(&self) -> Vec<&str> {
        self.z.iter().map(String::as_str).collect()
    }

    /// The mixed window `alpha_j = (y_{<j}, z_{>j})`, 0-based `j`.
    pub fn alpha(&self, j: usize) -> Vec<&str> {
        let mut a: Vec<&str> = self.y[..j].iter().map(String::as_str).collect();
        a.extend(self.z[j + 1..].iter().map(String::as_str));
        a
    }
}
