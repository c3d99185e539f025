use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::probkit::{Alphabet, Axis, ProbError};

use super::{QuantError, Result, ISOMETRY_TOL, PSD_TOL};

/// A spectrum attached to joint indices by the deterministic assignment
/// convention described in the module docs, together with the matching
/// eigenvectors (column `i` belongs to joint index `i`).
#[derive(Debug, Clone)]
pub struct EigenSystem {
    factors: Vec<Axis>,
    values: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

/// Greedy eigenvalue-to-index assignment: descending eigenvalues claim
/// the free joint index with the largest basis overlap.
pub(crate) fn assign_eigenpairs(
    factors: Vec<Axis>,
    raw_values: &DVector<f64>,
    raw_vectors: &DMatrix<Complex64>,
) -> EigenSystem {
    let dim = raw_values.len();
    let mut max_overlap = vec![0.0f64; dim];
    let mut argmax = vec![0usize; dim];
    for k in 0..dim {
        for i in 0..dim {
            let ov = raw_vectors[(i, k)].norm_sqr();
            if ov > max_overlap[k] {
                max_overlap[k] = ov;
                argmax[k] = i;
            }
        }
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        raw_values[b]
            .total_cmp(&raw_values[a])
            .then(max_overlap[b].total_cmp(&max_overlap[a]))
            .then(argmax[a].cmp(&argmax[b]))
            .then(a.cmp(&b))
    });

    // Overlaps within this margin count as tied, so the smaller index
    // wins even when the solver breaks an exact degeneracy unevenly.
    const OVERLAP_TIE: f64 = 1e-9;
    let mut assigned: Vec<Option<usize>> = vec![None; dim];
    for &k in &order {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..dim {
            if assigned[i].is_some() {
                continue;
            }
            let ov = raw_vectors[(i, k)].norm_sqr();
            match best {
                Some((_, b)) if ov <= b + OVERLAP_TIE => {}
                _ => best = Some((i, ov)),
            }
        }
        let (slot, _) = best.expect("one free slot per eigenpair");
        assigned[slot] = Some(k);
    }

    let mut values = vec![0.0; dim];
    let mut vectors = DMatrix::<Complex64>::zeros(dim, dim);
    for (slot, k) in assigned.iter().enumerate() {
        let k = k.expect("all slots filled");
        // Tiny negatives from the eigensolver are clipped after the PSD
        // check at construction.
        values[slot] = if raw_values[k] < 0.0 && raw_values[k] >= -PSD_TOL {
            0.0
        } else {
            raw_values[k]
        };
        vectors.set_column(slot, &raw_vectors.column(k));
    }
    EigenSystem { factors, values, vectors }
}

impl EigenSystem {
    pub fn factors(&self) -> &[Axis] {
        &self.factors
    }

    /// Eigenvalues indexed by the joint alphabet.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Orthonormal eigenvectors; column `i` is assigned to joint index
    /// `i`.
    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
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

    fn sizes(&self) -> Vec<usize> {
        self.factors.iter().map(Axis::size).collect()
    }

    /// Marginal eigenvalues on the named factors (in the order given):
    /// the joint eigenvalue distribution summed like a classical
    /// probability vector.
    pub fn marginal(&self, keep: &[&str]) -> Result<Vec<f64>> {
        let keep_pos = self.positions(keep)?;
        let sizes = self.sizes();
        let kept_sizes: Vec<usize> = keep_pos.iter().map(|&p| sizes[p]).collect();
        let kept_dim: usize = kept_sizes.iter().product::<usize>().max(1);
        let mut out = vec![0.0; kept_dim];
        let mut digits = vec![0usize; sizes.len()];
        for (idx, &v) in self.values.iter().enumerate() {
            let mut rem = idx;
            for i in (0..sizes.len()).rev() {
                digits[i] = rem % sizes[i];
                rem /= sizes[i];
            }
            let mut k = 0usize;
            for &p in &keep_pos {
                k = k * sizes[p] + digits[p];
            }
            out[k] += v;
        }
        Ok(out)
    }

    /// Conditional table `lambda(target|given)` indexed by the joint
    /// alphabet of `[target..., given...]`; `0/0` is 0. Exposed as an
    /// accessor only — no further semantics are attached.
    pub fn conditional(&self, target: &[&str], given: &[&str]) -> Result<Vec<f64>> {
        let tg: Vec<&str> = target.iter().chain(given).copied().collect();
        let joint = self.marginal(&tg)?;
        let g = self.marginal(given)?;
        let g_dim = g.len();
        Ok(joint
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let gi = i % g_dim.max(1);
                if g[gi] > 0.0 {
                    w / g[gi]
                } else {
                    0.0
                }
            })
            .collect())
    }

    /// Pointwise ratio table `lambda(a,b) / (lambda(a) lambda(b))`
    /// indexed by the joint alphabet of `[a..., b...]`; `0/0` is 0.
    pub fn pointwise_ratio(&self, a: &[&str], b: &[&str]) -> Result<Vec<f64>> {
        let ab: Vec<&str> = a.iter().chain(b).copied().collect();
        let joint = self.marginal(&ab)?;
        let ma = self.marginal(a)?;
        let mb = self.marginal(b)?;
        let b_dim = mb.len().max(1);
        Ok(joint
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let ai = i / b_dim;
                let bi = i % b_dim;
                let denom = ma[ai] * mb[bi];
                if denom > 0.0 {
                    w / denom
                } else {
                    0.0
                }
            })
            .collect())
    }
}

/// A complex map whose columns are orthonormal: `A^H A = I` on the input
/// space.
#[derive(Debug, Clone)]
pub struct Isometry {
    input_axes: Vec<Axis>,
    output_axes: Vec<Axis>,
    entries: DMatrix<Complex64>,
}

impl Isometry {
    pub fn new(
        input_axes: Vec<Axis>,
        output_axes: Vec<Axis>,
        entries: DMatrix<Complex64>,
    ) -> Result<Self> {
        let din: usize = input_axes.iter().map(Axis::size).product::<usize>().max(1);
        let dout: usize = output_axes.iter().map(Axis::size).product::<usize>().max(1);
        if entries.nrows() != dout || entries.ncols() != din {
            return Err(QuantError::DimensionMismatch {
                rows: entries.nrows(),
                cols: entries.ncols(),
                dim: dout,
            });
        }
        let gram = entries.adjoint() * &entries;
        let mut dev = 0.0f64;
        for i in 0..din {
            for j in 0..din {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        if dev > ISOMETRY_TOL {
            return Err(QuantError::NotIsometry(dev));
        }
        Ok(Self { input_axes, output_axes, entries })
    }

    pub fn input_axes(&self) -> &[Axis] {
        &self.input_axes
    }

    pub fn output_axes(&self) -> &[Axis] {
        &self.output_axes
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn input_dim(&self) -> usize {
        self.entries.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Eigendecomposition-as-history: amplitudes `A(x|r)` (an isometry whose
/// columns are the eigenvectors with nonzero weight) and `A(r)` (square
/// roots of the eigenvalues), reproducing the state as
/// `sum_r (A(.|r) A(r)) (A(.|r) A(r))^H`.
#[derive(Debug, Clone)]
pub struct Purification {
    pub map: Isometry,
    pub weights: Vec<f64>,
}

impl Purification {
    /// Puts the pieces back together; tests compare this against the
    /// original state.
    pub fn reassemble(&self) -> Result<super::DensityMatrix> {
        let dim = self.map.output_dim();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (r, &w) in self.weights.iter().enumerate() {
            let col = self.map.entries.column(r);
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] += col[i] * col[j].conj() * Complex64::new(w * w, 0.0);
                }
            }
        }
        super::DensityMatrix::new(self.map.output_axes.clone(), m)
    }
}

impl super::DensityMatrix {
    /// Rank-trimmed purification via the eigendecomposition: reservoir
    /// symbol `r` carries amplitude `sqrt(lambda_r)` and the column
    /// `<x|lambda_r>`. A pure state gets a single reservoir symbol.
    pub fn purify(&self, reservoir_name: &str) -> Result<Purification> {
        let eig = self.eigensystem();
        let kept: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] > 1e-12).collect();
        let rank = kept.len().max(1);
        let dim = self.dim();
        let mut entries = DMatrix::<Complex64>::zeros(dim, rank);
        let mut weights = Vec::with_capacity(rank);
        if kept.is_empty() {
            // Cannot happen for a valid state (trace 1), defensive only.
            return Err(QuantError::TraceNotOne(0.0));
        }
        for (r, &slot) in kept.iter().enumerate() {
            entries.set_column(r, &eig.vectors.column(slot));
            weights.push(eig.values[slot].sqrt());
        }
        let map = Isometry::new(
            vec![Axis::new(
                reservoir_name,
                Alphabet::indexed(kept.len()).expect("rank >= 1"),
            )],
            self.factors().to_vec(),
            entries,
        )?;
        Ok(Purification { map, weights })
    }
}

#[cfg(test)]
mod tests {
    use super::super::DensityMatrix;
    use super::*;
    use crate::testutil::{random_density, random_diagonal};
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn bell() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(
            vec![Axis::bit("x"), Axis::bit("y")],
            &[
                Complex64::new(h, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(h, 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn diagonal_states_get_the_natural_assignment() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let rho = random_diagonal(&mut rng, vec![Axis::bit("x"), Axis::bit("y")]);
            let eig = rho.eigensystem();
            for i in 0..4 {
                assert!(
                    (eig.values()[i] - rho.entries()[(i, i)].re).abs() < 1e-12,
                    "diagonal assignment broke at {i}"
                );
            }
        }
    }

    #[test]
    fn bell_state_marginal_eigenvalues_expose_provenance() {
        let rho = bell();
        let lam_y = rho.marginal_eigenvalues(&["y"]).unwrap();
        assert!((lam_y[0] - 1.0).abs() < 1e-12 && lam_y[1].abs() < 1e-12);
        // The reduced state's spectrum is (0.5, 0.5): a genuine gap.
        let reduced = rho.partial_trace(&["y"]).unwrap().eigensystem();
        assert!((lam_y[0] - reduced.values()[0]).abs() > 0.4);
    }

    #[test]
    fn diagonal_marginal_eigenvalues_match_reduced_spectrum() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..20 {
            let rho = random_diagonal(
                &mut rng,
                vec![
                    Axis::new("x", Alphabet::indexed(3).unwrap()),
                    Axis::bit("y"),
                ],
            );
            let lam_y = rho.marginal_eigenvalues(&["y"]).unwrap();
            let red = rho.partial_trace(&["y"]).unwrap().eigensystem();
            for i in 0..2 {
                assert!((lam_y[i] - red.values()[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_state_marginals_match_reduced_spectrum_as_multisets() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let a = random_density(&mut rng, vec![Axis::bit("x")], 2);
        let b = random_density(&mut rng, vec![Axis::bit("y")], 2);
        let prod = DensityMatrix::new(
            vec![Axis::bit("x"), Axis::bit("y")],
            a.entries().kronecker(b.entries()),
        )
        .unwrap();
        let mut lam_y = prod.marginal_eigenvalues(&["y"]).unwrap();
        let mut spec = prod.partial_trace(&["y"]).unwrap().eigensystem().values().to_vec();
        lam_y.sort_by(f64::total_cmp);
        spec.sort_by(f64::total_cmp);
        for (a, b) in lam_y.iter().zip(&spec) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn purify_then_reassemble_is_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        // Random rank-2 qutrit state.
        let rho = random_density(
            &mut rng,
            vec![Axis::new("x", Alphabet::indexed(3).unwrap())],
            2,
        );
        let p = rho.purify("r").unwrap();
        assert_eq!(p.map.input_dim(), 2, "rank trim");
        let back = p.reassemble().unwrap();
        let dev = (back.entries() - rho.entries()).map(|c| c.norm()).max();
        assert!(dev < 1e-9, "reassembly residual {dev}");
    }

    #[test]
    fn purify_pure_state_has_single_symbol() {
        let p = bell().purify("r").unwrap();
        assert_eq!(p.map.input_dim(), 1);
        assert!((p.weights[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn purify_maximally_mixed_qubit() {
        let mm = DensityMatrix::maximally_mixed(vec![Axis::bit("x")]).unwrap();
        let p = mm.purify("r").unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((p.weights[0] - h).abs() < 1e-12 && (p.weights[1] - h).abs() < 1e-12);
        // A(x|r) is square here, hence unitary.
        let g = p.map.entries().adjoint() * p.map.entries();
        assert!((g[(0, 0)].re - 1.0).abs() < 1e-12 && g[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn lambda_accessor_tables_are_consistent() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let rho = random_density(&mut rng, vec![Axis::bit("x"), Axis::bit("y")], 4);
        let eig = rho.eigensystem();
        let joint = eig.marginal(&["x", "y"]).unwrap();
        let mx = eig.marginal(&["x"]).unwrap();
        let cond = eig.conditional(&["y"], &["x"]).unwrap();
        let ratio = eig.pointwise_ratio(&["y"], &["x"]).unwrap();
        let my = eig.marginal(&["y"]).unwrap();
        for y in 0..2 {
            for x in 0..2 {
                // conditional/ratio tables are indexed with y major here.
                let j = joint[x * 2 + y];
                assert!((cond[y * 2 + x] - j / mx[x]).abs() < 1e-12);
                assert!((ratio[y * 2 + x] - j / (my[y] * mx[x])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn isometry_validation() {
        let m = DMatrix::<Complex64>::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        );
        assert!(matches!(
            Isometry::new(vec![Axis::bit("r")], vec![Axis::bit("x")], m),
            Err(QuantError::NotIsometry(_))
        ));
    }
}
