use serde::{Deserialize, Serialize};

use super::{ProbError, Result};

/// A finite, ordered set of distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(ProbError::EmptyAlphabet);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(ProbError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// Alphabet `{0, 1, ..., size-1}` with decimal labels.
    pub fn indexed(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| i.to_string()))
    }

    /// Product alphabet with tuple labels `(a,b)`, first component most
    /// significant.
    pub fn product(parts: &[&Alphabet]) -> Result<Self> {
        let mut labels = vec![String::new()];
        for part in parts {
            let mut next = Vec::with_capacity(labels.len() * part.size());
            for prefix in &labels {
                for l in part.labels() {
                    if prefix.is_empty() {
                        next.push(l.clone());
                    } else {
                        next.push(format!("{prefix},{l}"));
                    }
                }
            }
            labels = next;
        }
        Self::new(labels.into_iter().map(|l| {
            if parts.len() > 1 {
                format!("({l})")
            } else {
                l
            }
        }))
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| ProbError::OutOfAlphabet(label.to_string()))
    }
}

/// A named variable together with its alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub labels: Alphabet,
}

impl Axis {
    pub fn new(name: impl Into<String>, labels: Alphabet) -> Self {
        Self { name: name.into(), labels }
    }

    /// Binary axis with labels `0`, `1`.
    pub fn bit(name: impl Into<String>) -> Self {
        Self::new(name, Alphabet::indexed(2).expect("nonempty"))
    }

    pub fn size(&self) -> usize {
        self.labels.size()
    }
}

/// Shared indexing helpers for a list of axes: row-major lexicographic
/// order, first axis most significant.
pub(crate) fn check_axes_distinct(axes: &[Axis]) -> Result<()> {
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].iter().any(|b| b.name == a.name) {
            return Err(ProbError::DuplicateAxis(a.name.clone()));
        }
    }
    Ok(())
}

pub(crate) fn joint_size(axes: &[Axis]) -> usize {
    axes.iter().map(Axis::size).product::<usize>().max(1)
}

/// Strides for flattening a multi-index; `strides[i]` is the weight of
/// axis `i`'s digit in the flat index.
pub(crate) fn strides(axes: &[Axis]) -> Vec<usize> {
    let mut s = vec![1usize; axes.len()];
    for i in (0..axes.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * axes[i + 1].size();
    }
    s
}

pub(crate) fn flat_index(axes: &[Axis], digits: &[usize]) -> usize {
    debug_assert_eq!(axes.len(), digits.len());
    let s = strides(axes);
    digits.iter().zip(&s).map(|(d, st)| d * st).sum()
}

pub(crate) fn unflatten(axes: &[Axis], mut index: usize, out: &mut [usize]) {
    for i in (0..axes.len()).rev() {
        let size = axes[i].size();
        out[i] = index % size;
        index /= size;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(matches!(
            Alphabet::new(["a", "a"]),
            Err(ProbError::DuplicateLabel(_))
        ));
        assert!(matches!(
            Alphabet::new(Vec::<String>::new()),
            Err(ProbError::EmptyAlphabet)
        ));
    }

    #[test]
    fn product_orders_first_component_most_significant() {
        let a = Alphabet::new(["0", "1"]).unwrap();
        let b = Alphabet::new(["x", "y", "z"]).unwrap();
        let p = Alphabet::product(&[&a, &b]).unwrap();
        assert_eq!(p.size(), 6);
        assert_eq!(p.label(0), "(0,x)");
        assert_eq!(p.label(3), "(1,x)");
    }

    #[test]
    fn flat_index_round_trips() {
        let axes = vec![
            Axis::new("a", Alphabet::indexed(3).unwrap()),
            Axis::new("b", Alphabet::indexed(2).unwrap()),
            Axis::new("c", Alphabet::indexed(4).unwrap()),
        ];
        let mut digits = vec![0; 3];
        for i in 0..24 {
            unflatten(&axes, i, &mut digits);
            assert_eq!(flat_index(&axes, &digits), i);
        }
        assert_eq!(flat_index(&axes, &[1, 0, 0]), 8);
    }
}
