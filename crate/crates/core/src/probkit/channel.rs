use serde::{Deserialize, Serialize};

use super::alphabet::{check_axes_distinct, flat_index, joint_size, Axis};
use super::dist::Dist;
use super::{ProbError, Result, NORM_TOL};

/// A conditional distribution P(outputs | inputs): one normalized row per
/// input symbol tuple, rows and columns in lexicographic order of the
/// respective axes.
///
/// Serialized as `{"schema_version":1,"input_axes":[...],"output_axes":[...],
/// "rows":[[...],...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr", into = "ChannelRepr")]
pub struct Channel {
    input_axes: Vec<Axis>,
    output_axes: Vec<Axis>,
    rows: Vec<Vec<f64>>,
}

pub(crate) const CHANNEL_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    schema_version: u32,
    input_axes: Vec<Axis>,
    output_axes: Vec<Axis>,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<ChannelRepr> for Channel {
    type Error = ProbError;
    fn try_from(r: ChannelRepr) -> Result<Self> {
        if r.schema_version != CHANNEL_SCHEMA_VERSION {
            return Err(ProbError::UnknownVariable(format!(
                "unsupported channel schema_version {}",
                r.schema_version
            )));
        }
        Channel::new(r.input_axes, r.output_axes, r.rows)
    }
}

impl From<Channel> for ChannelRepr {
    fn from(c: Channel) -> Self {
        ChannelRepr {
            schema_version: CHANNEL_SCHEMA_VERSION,
            input_axes: c.input_axes,
            output_axes: c.output_axes,
            rows: c.rows,
        }
    }
}

impl Channel {
    pub fn new(input_axes: Vec<Axis>, output_axes: Vec<Axis>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut all = input_axes.clone();
        all.extend(output_axes.iter().cloned());
        check_axes_distinct(&all)?;
        let n_in = joint_size(&input_axes);
        let n_out = joint_size(&output_axes);
        if rows.len() != n_in {
            return Err(ProbError::WeightLength { got: rows.len(), expected: n_in });
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_out {
                return Err(ProbError::WeightLength { got: row.len(), expected: n_out });
            }
            let mut sum = 0.0;
            for (i, &w) in row.iter().enumerate() {
                if w < 0.0 {
                    return Err(ProbError::NegativeWeight { index: r * n_out + i, value: w });
                }
                sum += w;
            }
            if (sum - 1.0).abs() > NORM_TOL {
                return Err(ProbError::RowNotNormalized { row: r, sum, tol: NORM_TOL });
            }
        }
        Ok(Self { input_axes, output_axes, rows })
    }

    /// Binary symmetric channel with flip probability `p`.
    pub fn binary_symmetric(input: &str, output: &str, p: f64) -> Result<Self> {
        Self::new(
            vec![Axis::bit(input)],
            vec![Axis::bit(output)],
            vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
        )
    }

    /// Channel whose output is a deterministic function of the input,
    /// given as the output digit tuple per input flat index.
    pub fn deterministic(
        input_axes: Vec<Axis>,
        output_axes: Vec<Axis>,
        map: impl Fn(usize) -> Vec<usize>,
    ) -> Result<Self> {
        let n_in = joint_size(&input_axes);
        let n_out = joint_size(&output_axes);
        let mut rows = Vec::with_capacity(n_in);
        for i in 0..n_in {
            let digits = map(i);
            let mut row = vec![0.0; n_out];
            row[flat_index(&output_axes, &digits)] = 1.0;
            rows.push(row);
        }
        Self::new(input_axes, output_axes, rows)
    }

    pub fn input_axes(&self) -> &[Axis] {
        &self.input_axes
    }

    pub fn output_axes(&self) -> &[Axis] {
        &self.output_axes
    }

    pub fn input_size(&self) -> usize {
        joint_size(&self.input_axes)
    }

    pub fn output_size(&self) -> usize {
        joint_size(&self.output_axes)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.rows[input]
    }

    pub(crate) fn row_by_digits(&self, digits: &[usize]) -> &[f64] {
        &self.rows[flat_index(&self.input_axes, digits)]
    }

    /// The row for one input as a `Dist` over the output axes.
    pub fn row_dist(&self, input: usize) -> Result<Dist> {
        Dist::new(self.output_axes.clone(), self.rows[input].clone())
    }

    /// Product channel P(a,b|x) = P(a|x) P(b|x) for two channels with the
    /// same input axes (conditionally independent outputs).
    pub fn conditionally_independent(a: &Channel, b: &Channel) -> Result<Channel> {
        if a.input_axes != b.input_axes {
            return Err(ProbError::AlphabetMismatch {
                var: a
                    .input_axes
                    .first()
                    .map(|x| x.name.clone())
                    .unwrap_or_default(),
                expected: a.input_size(),
                got: b.input_size(),
            });
        }
        let mut output_axes = a.output_axes.clone();
        output_axes.extend(b.output_axes.iter().cloned());
        let rows = a
            .rows
            .iter()
            .zip(&b.rows)
            .map(|(ra, rb)| {
                let mut row = Vec::with_capacity(ra.len() * rb.len());
                for &wa in ra {
                    for &wb in rb {
                        row.push(wa * wb);
                    }
                }
                row
            })
            .collect();
        Channel::new(a.input_axes.clone(), output_axes, rows)
    }

    /// Sums out part of the output: a channel onto the kept output axes.
    pub fn output_marginal(&self, keep: &[&str]) -> Result<Channel> {
        let mut rows = Vec::with_capacity(self.rows.len());
        let mut kept_axes = None;
        for i in 0..self.rows.len() {
            let d = self.row_dist(i)?.marginal(keep)?;
            kept_axes.get_or_insert_with(|| d.axes().to_vec());
            rows.push(d.weights().to_vec());
        }
        Channel::new(self.input_axes.clone(), kept_axes.unwrap(), rows)
    }
}
