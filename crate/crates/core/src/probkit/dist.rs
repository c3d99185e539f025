use serde::{Deserialize, Serialize};

use super::alphabet::{check_axes_distinct, flat_index, joint_size, strides, unflatten, Axis};
use super::channel::Channel;
use super::{ProbError, Result, NORM_TOL};

/// A probability vector over the product alphabet of named axes.
///
/// Weights are row-major lexicographic in axis order (first axis most
/// significant). A `Dist` with no axes is the trivial point distribution
/// on the empty tuple; it shows up as the result of marginalizing every
/// axis away and makes conditional information formulas uniform.
///
/// The JSON form is exactly `{"axes":[{"name","labels"}],"weights":[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistRepr", into = "DistRepr")]
pub struct Dist {
    axes: Vec<Axis>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistRepr {
    axes: Vec<Axis>,
    weights: Vec<f64>,
}

impl TryFrom<DistRepr> for Dist {
    type Error = ProbError;
    fn try_from(r: DistRepr) -> Result<Self> {
        Dist::new(r.axes, r.weights)
    }
}

impl From<Dist> for DistRepr {
    fn from(d: Dist) -> Self {
        DistRepr { axes: d.axes, weights: d.weights }
    }
}

impl Dist {
    /// Validates nonnegativity and normalization (within [`NORM_TOL`]);
    /// out-of-tolerance input is rejected, never renormalized.
    pub fn new(axes: Vec<Axis>, weights: Vec<f64>) -> Result<Self> {
        check_axes_distinct(&axes)?;
        let expected = joint_size(&axes);
        if weights.len() != expected {
            return Err(ProbError::WeightLength { got: weights.len(), expected });
        }
        let mut sum = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if w < 0.0 {
                return Err(ProbError::NegativeWeight { index: i, value: w });
            }
            sum += w;
        }
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(ProbError::NotNormalized { sum, tol: NORM_TOL });
        }
        Ok(Self { axes, weights })
    }

    /// Uniform distribution over the product alphabet.
    pub fn uniform(axes: Vec<Axis>) -> Result<Self> {
        check_axes_distinct(&axes)?;
        let n = joint_size(&axes);
        Ok(Self { axes, weights: vec![1.0 / n as f64; n] })
    }

    /// Point mass on the symbol tuple given by per-axis indices.
    pub fn point_mass(axes: Vec<Axis>, digits: &[usize]) -> Result<Self> {
        check_axes_distinct(&axes)?;
        if digits.len() != axes.len() {
            return Err(ProbError::WeightLength { got: digits.len(), expected: axes.len() });
        }
        for (d, a) in digits.iter().zip(&axes) {
            if *d >= a.size() {
                return Err(ProbError::SymbolIndex { index: *d, size: a.size() });
            }
        }
        let mut weights = vec![0.0; joint_size(&axes)];
        weights[flat_index(&axes, digits)] = 1.0;
        Ok(Self { axes, weights })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn axis_names(&self) -> Vec<&str> {
        self.axes.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn axis(&self, name: &str) -> Result<&Axis> {
        self.axes
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| ProbError::UnknownVariable(name.to_string()))
    }

    fn axis_positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut pos = Vec::with_capacity(names.len());
        for n in names {
            let p = self
                .axes
                .iter()
                .position(|a| a.name == *n)
                .ok_or_else(|| ProbError::UnknownVariable(n.to_string()))?;
            if pos.contains(&p) {
                return Err(ProbError::OverlappingVariables(n.to_string()));
            }
            pos.push(p);
        }
        Ok(pos)
    }

    /// Weight of one joint symbol, addressed by per-axis indices in axis
    /// order.
    pub fn weight_at(&self, digits: &[usize]) -> f64 {
        self.weights[flat_index(&self.axes, digits)]
    }

    /// Sums out every axis not listed in `keep`. The kept axes appear in
    /// the order given, so this doubles as an axis reorder.
    pub fn marginal(&self, keep: &[&str]) -> Result<Dist> {
        let pos = self.axis_positions(keep)?;
        let kept_axes: Vec<Axis> = pos.iter().map(|&p| self.axes[p].clone()).collect();
        let kept_strides = strides(&kept_axes);
        let full_strides = strides(&self.axes);
        // For each full flat index, the kept flat index is a fixed linear
        // combination of its digits; one pass accumulates the marginal.
        let mut weights = vec![0.0; joint_size(&kept_axes)];
        let mut digits = vec![0usize; self.axes.len()];
        for (i, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            unflatten(&self.axes, i, &mut digits);
            let mut k = 0;
            for (slot, &p) in pos.iter().enumerate() {
                k += digits[p] * kept_strides[slot];
            }
            weights[k] += w;
        }
        let _ = full_strides;
        Ok(Dist { axes: kept_axes, weights })
    }

    /// Shannon entropy in nats; `0 ln 0 = 0` by branch.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for &w in &self.weights {
            if w > 0.0 {
                h -= w * w.ln();
            }
        }
        h.max(0.0)
    }
}

/// One factor of a chain-rule product: either a prior over fresh
/// variables or a channel whose inputs name variables introduced by
/// earlier factors.
#[derive(Debug, Clone)]
pub enum Factor {
    Prior(Dist),
    Conditional(Channel),
}

impl From<Dist> for Factor {
    fn from(d: Dist) -> Self {
        Factor::Prior(d)
    }
}

impl From<Channel> for Factor {
    fn from(c: Channel) -> Self {
        Factor::Conditional(c)
    }
}

/// Product distribution of a chain of factors.
///
/// Wiring is name-based: each channel's input axes must refer to
/// variables introduced by an earlier factor (so the factor list is a
/// topological order and cycles are unrepresentable — a forward or
/// circular reference fails with [`ProbError::UnorderedWiring`]).
pub fn joint_from_factors(factors: &[Factor]) -> Result<Dist> {
    let mut axes: Vec<Axis> = Vec::new();
    let mut weights = vec![1.0];
    for factor in factors {
        let (new_axes, parents): (&[Axis], &[Axis]) = match factor {
            Factor::Prior(d) => (d.axes(), &[]),
            Factor::Conditional(c) => (c.output_axes(), c.input_axes()),
        };
        let first_new = new_axes
            .first()
            .map(|a| a.name.clone())
            .unwrap_or_else(|| "<empty factor>".into());
        // Parents must already exist with matching alphabets.
        let mut parent_pos = Vec::with_capacity(parents.len());
        for p in parents {
            let pos = axes.iter().position(|a| a.name == p.name).ok_or_else(|| {
                ProbError::UnorderedWiring { var: first_new.clone(), parent: p.name.clone() }
            })?;
            if axes[pos].labels != p.labels {
                return Err(ProbError::AlphabetMismatch {
                    var: p.name.clone(),
                    expected: p.size(),
                    got: axes[pos].size(),
                });
            }
            parent_pos.push(pos);
        }
        for a in new_axes {
            if axes.iter().any(|b| b.name == a.name) {
                return Err(ProbError::DuplicateAxis(a.name.clone()));
            }
        }

        let old_axes = axes.clone();
        axes.extend(new_axes.iter().cloned());
        let new_size = joint_size(new_axes);
        let mut next = vec![0.0; weights.len() * new_size];
        let mut digits = vec![0usize; old_axes.len()];
        let mut parent_digits = vec![0usize; parents.len()];
        for (i, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            unflatten(&old_axes, i, &mut digits);
            for (slot, &p) in parent_pos.iter().enumerate() {
                parent_digits[slot] = digits[p];
            }
            let row = match factor {
                Factor::Prior(d) => d.weights(),
                Factor::Conditional(c) => c.row_by_digits(&parent_digits),
            };
            for (j, &r) in row.iter().enumerate() {
                next[i * new_size + j] = w * r;
            }
        }
        weights = next;
    }
    // Each step multiplies by a normalized row, so the product is
    // normalized up to rounding; build through `new` to keep the
    // invariant honest.
    Dist::new(axes, weights)
}

#[cfg(test)]
mod tests {
    use super::super::Alphabet;
    use super::*;

    fn bit(name: &str) -> Axis {
        Axis::bit(name)
    }

    #[test]
    fn rejects_bad_normalization_instead_of_fixing_it() {
        let err = Dist::new(vec![bit("x")], vec![0.5, 0.5 + 1e-9]).unwrap_err();
        assert!(matches!(err, ProbError::NotNormalized { .. }));
        let err = Dist::new(vec![bit("x")], vec![1.5, -0.5]).unwrap_err();
        assert!(matches!(err, ProbError::NegativeWeight { .. }));
    }

    #[test]
    fn two_independent_fair_bits_are_uniform_on_four() {
        let x = Dist::uniform(vec![bit("x")]).unwrap();
        let y = Dist::uniform(vec![bit("y")]).unwrap();
        let joint = joint_from_factors(&[x.into(), y.into()]).unwrap();
        assert_eq!(joint.weights(), &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn identity_channel_copies_a_uniform_bit() {
        let x = Dist::uniform(vec![bit("x")]).unwrap();
        let copy = Channel::new(
            vec![bit("x")],
            vec![bit("y")],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let joint = joint_from_factors(&[x.into(), copy.into()]).unwrap();
        assert_eq!(joint.weights(), &[0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn bsc_joint_matches_enumeration() {
        // Uniform input through a BSC(0.1): each of the four outcomes is
        // 0.5 * P(y|x), checked against the direct product evaluation.
        let x = Dist::uniform(vec![bit("x")]).unwrap();
        let bsc = Channel::binary_symmetric("x", "y", 0.1).unwrap();
        let joint = joint_from_factors(&[x.into(), bsc.into()]).unwrap();
        let expect = [0.45, 0.05, 0.05, 0.45];
        for (w, e) in joint.weights().iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn wiring_must_be_ordered() {
        let copy = Channel::new(
            vec![bit("x")],
            vec![bit("y")],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let err = joint_from_factors(&[copy.into()]).unwrap_err();
        assert!(matches!(err, ProbError::UnorderedWiring { .. }));
    }

    #[test]
    fn alphabet_mismatch_is_reported() {
        let x = Dist::uniform(vec![Axis::new("x", Alphabet::indexed(3).unwrap())]).unwrap();
        let copy = Channel::new(
            vec![bit("x")],
            vec![bit("y")],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let err = joint_from_factors(&[x.into(), copy.into()]).unwrap_err();
        assert!(matches!(err, ProbError::AlphabetMismatch { .. }));
    }

    #[test]
    fn marginal_of_correlated_pair_is_uniform() {
        let x = Dist::uniform(vec![bit("x")]).unwrap();
        let copy = Channel::new(
            vec![bit("x")],
            vec![bit("y")],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let joint = joint_from_factors(&[x.into(), copy.into()]).unwrap();
        let my = joint.marginal(&["y"]).unwrap();
        assert_eq!(my.weights(), &[0.5, 0.5]);
        // Marginal onto all axes is the identity.
        let all = joint.marginal(&["x", "y"]).unwrap();
        assert_eq!(all, joint);
        // Marginal of the BSC joint onto y stays uniform.
        let x = Dist::uniform(vec![bit("x")]).unwrap();
        let bsc = Channel::binary_symmetric("x", "y", 0.1).unwrap();
        let joint = joint_from_factors(&[x.into(), bsc.into()]).unwrap();
        let my = joint.marginal(&["y"]).unwrap();
        assert!((my.weights()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn marginal_unknown_name_errors() {
        let d = Dist::uniform(vec![bit("x")]).unwrap();
        assert!(matches!(
            d.marginal(&["nope"]),
            Err(ProbError::UnknownVariable(_))
        ));
    }

    #[test]
    fn entropy_point_uniform_and_frozen_value() {
        let p = Dist::point_mass(vec![bit("x"), bit("y")], &[1, 0]).unwrap();
        assert_eq!(p.entropy(), 0.0);
        let u = Dist::uniform(vec![bit("x"), bit("y")]).unwrap();
        assert!((u.entropy() - 4.0_f64.ln()).abs() < 1e-15);
        // Independent high-precision evaluation of -sum p ln p.
        let d = Dist::new(vec![bit("x")], vec![0.25, 0.75]).unwrap();
        assert!((d.entropy() - 0.562335144618808350).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let x = Dist::uniform(vec![bit("x")]).unwrap();
        let bsc = Channel::binary_symmetric("x", "y", 0.1).unwrap();
        let joint = joint_from_factors(&[x.into(), bsc.into()]).unwrap();
        let s = serde_json::to_string(&joint).unwrap();
        assert!(s.contains("\"axes\"") && s.contains("\"weights\""));
        let back: Dist = serde_json::from_str(&s).unwrap();
        assert_eq!(back, joint);
    }

    #[test]
    fn json_rejects_denormalized_input() {
        let s = r#"{"axes":[{"name":"x","labels":["0","1"]}],"weights":[0.7,0.4]}"#;
        assert!(serde_json::from_str::<Dist>(s).is_err());
    }
}
