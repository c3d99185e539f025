use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::probkit::{Axis, EntropySource, ProbError};

use super::eigen::{assign_eigenpairs, EigenSystem};
use super::{QuantError, Result, HERMITIAN_TOL, PSD_TOL};

/// A Hermitian, positive semidefinite, unit-trace operator on a labeled
/// tensor product of finite factors.
///
/// Rows and columns are indexed by the joint alphabet of the factors in
/// row-major lexicographic order (first factor most significant) — the
/// same convention `probkit` uses for weights.
///
/// JSON form: `{"factors":[{"name","labels"}],"re":[[...]],"im":[[...]]}`,
/// row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityRepr", into = "DensityRepr")]
pub struct DensityMatrix {
    factors: Vec<Axis>,
    entries: DMatrix<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct DensityRepr {
    factors: Vec<Axis>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<DensityRepr> for DensityMatrix {
    type Error = QuantError;
    fn try_from(r: DensityRepr) -> Result<Self> {
        let dim: usize = r.factors.iter().map(Axis::size).product::<usize>().max(1);
        if r.re.len() != dim || r.im.len() != dim {
            return Err(QuantError::DimensionMismatch { rows: r.re.len(), cols: r.im.len(), dim });
        }
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..dim {
            if r.re[i].len() != dim || r.im[i].len() != dim {
                return Err(QuantError::DimensionMismatch {
                    rows: r.re[i].len(),
                    cols: r.im[i].len(),
                    dim,
                });
            }
            for j in 0..dim {
                m[(i, j)] = Complex64::new(r.re[i][j], r.im[i][j]);
            }
        }
        DensityMatrix::new(r.factors, m)
    }
}

impl From<DensityMatrix> for DensityRepr {
    fn from(d: DensityMatrix) -> Self {
        let dim = d.dim();
        let mut re = vec![vec![0.0; dim]; dim];
        let mut im = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                re[i][j] = d.entries[(i, j)].re;
                im[i][j] = d.entries[(i, j)].im;
            }
        }
        DensityRepr { factors: d.factors, re, im }
    }
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace, and positive semidefiniteness
    /// (eigenvalues in `[-PSD_TOL, 0)` pass and are treated as zero when
    /// extracted; anything more negative is rejected).
    pub fn new(factors: Vec<Axis>, entries: DMatrix<Complex64>) -> Result<Self> {
        for (i, a) in factors.iter().enumerate() {
            if factors[..i].iter().any(|b| b.name == a.name) {
                return Err(ProbError::DuplicateAxis(a.name.clone()).into());
            }
        }
        let dim: usize = factors.iter().map(Axis::size).product::<usize>().max(1);
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(QuantError::DimensionMismatch {
                rows: entries.nrows(),
                cols: entries.ncols(),
                dim,
            });
        }
        let mut herm_dev = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let dev = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                herm_dev = herm_dev.max(dev);
            }
        }
        if herm_dev > HERMITIAN_TOL {
            return Err(QuantError::NotHermitian(herm_dev));
        }
        let trace: Complex64 = (0..dim).map(|i| entries[(i, i)]).sum();
        if (trace.re - 1.0).abs() > HERMITIAN_TOL || trace.im.abs() > HERMITIAN_TOL {
            return Err(QuantError::TraceNotOne(trace.re));
        }
        let min_eig = nalgebra::SymmetricEigen::new(entries.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(QuantError::NotPositive(min_eig));
        }
        Ok(Self { factors, entries })
    }

    /// Pure state |psi><psi| from an amplitude vector (normalized within
    /// the trace tolerance).
    pub fn pure(factors: Vec<Axis>, amplitudes: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(amplitudes);
        let m = &v * v.adjoint();
        Self::new(factors, m)
    }

    /// Diagonal (classical) state from a probability vector in joint
    /// lexicographic order.
    pub fn diagonal(factors: Vec<Axis>, weights: &[f64]) -> Result<Self> {
        let dim = weights.len();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (i, &w) in weights.iter().enumerate() {
            m[(i, i)] = Complex64::new(w, 0.0);
        }
        Self::new(factors, m)
    }

    /// Maximally mixed state.
    pub fn maximally_mixed(factors: Vec<Axis>) -> Result<Self> {
        let dim: usize = factors.iter().map(Axis::size).product::<usize>().max(1);
        let w = vec![1.0 / dim as f64; dim];
        Self::diagonal(factors, &w)
    }

    pub fn factors(&self) -> &[Axis] {
        &self.factors
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub(crate) fn factor_positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut pos = Vec::with_capacity(names.len());
        for n in names {
            let p = self
                .factors
                .iter()
                .position(|a| a.name == *n)
                .ok_or_else(|| QuantError::UnknownFactor(n.to_string()))?;
            if pos.contains(&p) {
                return Err(ProbError::OverlappingVariables(n.to_string()).into());
            }
            pos.push(p);
        }
        Ok(pos)
    }

    fn factor_sizes(&self) -> Vec<usize> {
        self.factors.iter().map(Axis::size).collect()
    }

    /// Reduced state on the named factors, in the order given; the rest
    /// are traced out. Tracing nothing returns the state unchanged (up to
    /// factor reorder).
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let keep_pos = self.factor_positions(keep)?;
        let sizes = self.factor_sizes();
        let drop_pos: Vec<usize> =
            (0..self.factors.len()).filter(|p| !keep_pos.contains(p)).collect();

        let kept_axes: Vec<Axis> = keep_pos.iter().map(|&p| self.factors[p].clone()).collect();
        let kept_dim: usize = kept_axes.iter().map(Axis::size).product::<usize>().max(1);
        let drop_dim: usize = drop_pos.iter().map(|&p| sizes[p]).product::<usize>().max(1);

        // Flat index of the full state from (kept multi-index, dropped
        // multi-index), respecting original factor positions.
        let full_strides = {
            let mut s = vec![1usize; sizes.len()];
            for i in (0..sizes.len().saturating_sub(1)).rev() {
                s[i] = s[i + 1] * sizes[i + 1];
            }
            s
        };
        let flat = |kept: usize, dropped: usize| -> usize {
            let mut idx = 0;
            let mut k = kept;
            for &p in keep_pos.iter().rev() {
                idx += (k % sizes[p]) * full_strides[p];
                k /= sizes[p];
            }
            let mut d = dropped;
            for &p in drop_pos.iter().rev() {
                idx += (d % sizes[p]) * full_strides[p];
                d /= sizes[p];
            }
            idx
        };

        let mut out = DMatrix::<Complex64>::zeros(kept_dim, kept_dim);
        for k1 in 0..kept_dim {
            for k2 in 0..kept_dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for d in 0..drop_dim {
                    acc += self.entries[(flat(k1, d), flat(k2, d))];
                }
                out[(k1, k2)] = acc;
            }
        }
        DensityMatrix::new(kept_axes, out)
    }

    /// Spectrum attached to joint indices by the crate's assignment
    /// convention (see the module docs).
    pub fn eigensystem(&self) -> EigenSystem {
        let eig = nalgebra::SymmetricEigen::new(self.entries.clone());
        assign_eigenpairs(self.factors.clone(), &eig.eigenvalues, &eig.eigenvectors)
    }

    /// Von Neumann entropy in nats: -sum of eigenvalue ln eigenvalue.
    pub fn von_neumann_entropy(&self) -> f64 {
        let eig = nalgebra::SymmetricEigen::new(self.entries.clone());
        let mut h = 0.0;
        for &l in eig.eigenvalues.iter() {
            if l > 0.0 {
                h -= l * l.ln();
            }
        }
        h.max(0.0)
    }

    /// S(a|b) = S(a,b) - S(b), where `a` and `b` partition the factors
    /// (`b` may be empty). Can be negative for entangled states.
    pub fn conditional_entropy(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        let mut seen = self.factor_positions(&[a, b].concat())?;
        seen.sort_unstable();
        if seen.len() != self.factors.len() {
            let missing = self
                .factors
                .iter()
                .enumerate()
                .find(|(i, _)| !seen.contains(i))
                .map(|(_, f)| f.name.clone())
                .unwrap_or_default();
            return Err(QuantError::BadPartition(missing));
        }
        Ok(self.von_neumann_entropy() - self.partial_trace(b)?.von_neumann_entropy())
    }

    /// Marginal eigenvalues: the joint eigenvalue distribution summed
    /// onto the named factors. Generally *not* the spectrum of
    /// [`partial_trace`] — the provenance of the eigenvalues matters.
    pub fn marginal_eigenvalues(&self, keep: &[&str]) -> Result<Vec<f64>> {
        self.eigensystem().marginal(keep)
    }
}

impl EntropySource for DensityMatrix {
    fn variable_names(&self) -> Vec<String> {
        self.factors.iter().map(|a| a.name.clone()).collect()
    }

    fn entropy_of(&self, vars: &[&str]) -> crate::probkit::Result<f64> {
        if vars.is_empty() {
            return Ok(0.0);
        }
        self.partial_trace(vars)
            .map(|r| r.von_neumann_entropy())
            .map_err(|e| match e {
                QuantError::UnknownFactor(n) => ProbError::UnknownVariable(n),
                QuantError::Prob(p) => p,
                other => ProbError::UnknownVariable(other.to_string()),
            })
    }
}
