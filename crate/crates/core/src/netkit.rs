//! Classical and quantum Bayesian-network evaluation.
//!
//! A net is an ordered list of nodes, each carrying a transition matrix
//! (classical) or transition amplitudes (quantum) indexed by its parents'
//! joint configuration. Nodes are evaluated in the declared order, which
//! must already be topological — no automatic reordering, so amplitude
//! sign conventions stay put.
//!
//! Each node has one of three dispositions at evaluation time:
//!
//! * **kept** (a marginalizer): a factor of the output state;
//! * **traced** (a reservoir): summed incoherently, i.e. matched between
//!   ket and bra;
//! * neither: summed coherently inside the amplitude, the way an
//!   internal wire disappears when kernels are composed.
//!
//! Classically the last two coincide, and the output is simply the joint
//! over the kept nodes. Reservoirs may be merged, and a reservoir on one
//! end of a two-node chain can be traded for one on the other end; both
//! rewrites leave the evaluated state untouched and are checked to do so
//! in the tests.
//!
//! Pair nodes that fan out through component-copying children model the
//! marginalizer arrows of the source diagrams; [`Node::delta_component`]
//! builds those children.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::probkit::{Alphabet, Axis, Dist, ProbError};
use crate::quantkit::{DensityMatrix, QuantError};

/// Output-dimension cap for evaluated states.
pub const DEFAULT_DIM_CAP: usize = 4096;
/// Cap on the full configuration space walked during evaluation.
const CONFIG_CAP: usize = 1 << 22;

const AMP_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("node `{0}` is declared twice")]
    DuplicateNode(String),
    #[error("node `{node}` references parent `{parent}` before it is declared (order must be topological)")]
    ParentNotDeclared { node: String, parent: String },
    #[error("node `{node}` has {got} kernel rows, expected {expected} (one per parent configuration)")]
    RowCount { node: String, got: usize, expected: usize },
    #[error("node `{node}` row {row} has {got} entries, expected {expected}")]
    RowWidth { node: String, row: usize, got: usize, expected: usize },
    #[error("node `{node}` row {row} has squared norm {norm:.17}, expected 1")]
    RowNorm { node: String, row: usize, norm: f64 },
    #[error("classical evaluation hit amplitude node `{0}`")]
    AmplitudeInClassical(String),
    #[error("quantum evaluation hit classical node `{0}`")]
    ClassicalInQuantum(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` is not a traced reservoir")]
    NotReservoir(String),
    #[error("cannot merge a sink reservoir with a source reservoir")]
    MixedMerge,
    #[error("reservoir trade needs a two-node chain: {0}")]
    UnsupportedTopology(String),
    #[error("evaluated state dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("configuration space of size {0} is too large to enumerate")]
    ConfigSpace(usize),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Quant(#[from] QuantError),
}

pub type Result<T> = std::result::Result<T, NetError>;

/// Kernel payload of a node: rows indexed by the parent joint
/// configuration (lexicographic in parent order), one entry per own
/// symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum NodeKind {
    #[serde(rename = "classical-matrix")]
    Classical { rows: Vec<Vec<f64>> },
    #[serde(rename = "amplitude")]
    Amplitude {
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub labels: Alphabet,
    pub parents: Vec<String>,
    pub kind: NodeKind,
}

impl Node {
    pub fn classical(
        name: impl Into<String>,
        labels: Alphabet,
        parents: impl IntoIterator<Item = String>,
        rows: Vec<Vec<f64>>,
    ) -> Self {
        Self {
            name: name.into(),
            labels,
            parents: parents.into_iter().collect(),
            kind: NodeKind::Classical { rows },
        }
    }

    pub fn amplitude(
        name: impl Into<String>,
        labels: Alphabet,
        parents: impl IntoIterator<Item = String>,
        rows: Vec<Vec<Complex64>>,
    ) -> Self {
        let re = rows.iter().map(|r| r.iter().map(|c| c.re).collect()).collect();
        let im = rows.iter().map(|r| r.iter().map(|c| c.im).collect()).collect();
        Self {
            name: name.into(),
            labels,
            parents: parents.into_iter().collect(),
            kind: NodeKind::Amplitude { re, im },
        }
    }

    /// Root amplitude node (no parents).
    pub fn amplitude_root(name: impl Into<String>, amps: Vec<Complex64>) -> Self {
        Self::amplitude(name, Alphabet::indexed(amps.len()).expect("nonempty"), [], vec![amps])
    }

    /// Copy of one component of a product-alphabet parent: the
    /// marginalizer fan-out, `A(v | (v_1..v_k)) = delta(v, v_component)`.
    pub fn delta_component(
        name: impl Into<String>,
        parent: &str,
        parent_parts: &[&Alphabet],
        component: usize,
    ) -> Self {
        let own = parent_parts[component].clone();
        let parent_size: usize = parent_parts.iter().map(|a| a.size()).product();
        let mut rows = Vec::with_capacity(parent_size);
        for cfg in 0..parent_size {
            let mut rem = cfg;
            let mut digit = 0;
            for (i, part) in parent_parts.iter().enumerate().rev() {
                let d = rem % part.size();
                rem /= part.size();
                if i == component {
                    digit = d;
                }
            }
            let mut row = vec![Complex64::new(0.0, 0.0); own.size()];
            row[digit] = Complex64::new(1.0, 0.0);
            rows.push(row);
        }
        Self::amplitude(name, own, [parent.to_string()], rows)
    }

    fn arity(&self) -> usize {
        self.labels.size()
    }

    fn amp(&self, row: usize, col: usize) -> Complex64 {
        match &self.kind {
            NodeKind::Classical { rows } => Complex64::new(rows[row][col], 0.0),
            NodeKind::Amplitude { re, im } => Complex64::new(re[row][col], im[row][col]),
        }
    }
}

/// A validated net: nodes in topological order plus the traced and kept
/// subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetRepr", into = "NetRepr")]
pub struct NetSpec {
    nodes: Vec<Node>,
    reservoirs: Vec<String>,
    kept: Vec<String>,
    dim_cap: usize,
}

#[derive(Serialize, Deserialize)]
struct NetRepr {
    nodes: Vec<Node>,
    reservoirs: Vec<String>,
    kept: Vec<String>,
}

impl TryFrom<NetRepr> for NetSpec {
    type Error = NetError;
    fn try_from(r: NetRepr) -> Result<Self> {
        let mut net = NetSpec::new(r.nodes)?.with_reservoirs(r.reservoirs)?;
        if !r.kept.is_empty() {
            net = net.with_kept(r.kept)?;
        }
        Ok(net)
    }
}

impl From<NetSpec> for NetRepr {
    fn from(n: NetSpec) -> Self {
        NetRepr { nodes: n.nodes, reservoirs: n.reservoirs, kept: n.kept }
    }
}

impl NetSpec {
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        for (i, node) in nodes.iter().enumerate() {
            if nodes[..i].iter().any(|n| n.name == node.name) {
                return Err(NetError::DuplicateNode(node.name.clone()));
            }
            let mut parent_size = 1usize;
            for p in &node.parents {
                let parent = nodes[..i].iter().find(|n| n.name == *p).ok_or_else(|| {
                    NetError::ParentNotDeclared { node: node.name.clone(), parent: p.clone() }
                })?;
                parent_size *= parent.arity();
            }
            let rows = match &node.kind {
                NodeKind::Classical { rows } => rows.len(),
                NodeKind::Amplitude { re, .. } => re.len(),
            };
            if rows != parent_size {
                return Err(NetError::RowCount {
                    node: node.name.clone(),
                    got: rows,
                    expected: parent_size,
                });
            }
            for row in 0..parent_size {
                let width = match &node.kind {
                    NodeKind::Classical { rows } => rows[row].len(),
                    NodeKind::Amplitude { re, .. } => re[row].len(),
                };
                if width != node.arity() {
                    return Err(NetError::RowWidth {
                        node: node.name.clone(),
                        row,
                        got: width,
                        expected: node.arity(),
                    });
                }
                let norm: f64 = match &node.kind {
                    NodeKind::Classical { rows } => rows[row].iter().sum(),
                    NodeKind::Amplitude { .. } => {
                        (0..node.arity()).map(|c| node.amp(row, c).norm_sqr()).sum()
                    }
                };
                if (norm - 1.0).abs() > AMP_NORM_TOL {
                    return Err(NetError::RowNorm { node: node.name.clone(), row, norm });
                }
            }
        }
        let kept = nodes.iter().map(|n| n.name.clone()).collect();
        Ok(Self { nodes, reservoirs: Vec::new(), kept, dim_cap: DEFAULT_DIM_CAP })
    }

    /// Marks the named nodes as traced reservoirs (and drops them from
    /// the kept set).
    pub fn with_reservoirs(mut self, names: impl IntoIterator<Item = String>) -> Result<Self> {
        self.reservoirs = names.into_iter().collect();
        for r in &self.reservoirs {
            self.node_index(r)?;
        }
        self.kept = self
            .nodes
            .iter()
            .map(|n| n.name.clone())
            .filter(|n| !self.reservoirs.contains(n))
            .collect();
        Ok(self)
    }

    /// Restricts the output state to the named nodes, in this order;
    /// everything else that is not traced is summed coherently.
    pub fn with_kept(mut self, names: impl IntoIterator<Item = String>) -> Result<Self> {
        self.kept = names.into_iter().collect();
        for k in &self.kept {
            self.node_index(k)?;
            if self.reservoirs.contains(k) {
                return Err(NetError::NotReservoir(format!("`{k}` is both kept and traced")));
            }
        }
        Ok(self)
    }

    pub fn with_dimension_cap(mut self, cap: usize) -> Self {
        self.dim_cap = cap;
        self
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn reservoirs(&self) -> &[String] {
        &self.reservoirs
    }

    pub fn kept(&self) -> &[String] {
        &self.kept
    }

    fn node_index(&self, name: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| NetError::UnknownNode(name.to_string()))
    }

    fn node(&self, name: &str) -> Result<&Node> {
        Ok(&self.nodes[self.node_index(name)?])
    }

    fn children_of(&self, name: &str) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.parents.iter().any(|p| p == name))
            .map(|(i, _)| i)
            .collect()
    }

    fn axes_of(&self, names: &[String]) -> Result<Vec<Axis>> {
        names
            .iter()
            .map(|n| self.node(n).map(|node| Axis::new(node.name.clone(), node.labels.clone())))
            .collect()
    }

    /// Walks every configuration of every node, calling `visit` with the
    /// per-node digit vector and the product amplitude.
    fn enumerate(&self, mut visit: impl FnMut(&[usize], Complex64)) -> Result<()> {
        let sizes: Vec<usize> = self.nodes.iter().map(Node::arity).collect();
        let total: usize = sizes.iter().product();
        if total > CONFIG_CAP {
            return Err(NetError::ConfigSpace(total));
        }
        let parent_idx: Vec<Vec<usize>> = self
            .nodes
            .iter()
            .map(|n| n.parents.iter().map(|p| self.node_index(p).expect("validated")).collect())
            .collect();
        let mut digits = vec![0usize; self.nodes.len()];
        for cfg in 0..total {
            let mut rem = cfg;
            for i in (0..sizes.len()).rev() {
                digits[i] = rem % sizes[i];
                rem /= sizes[i];
            }
            let mut amp = Complex64::new(1.0, 0.0);
            for (i, node) in self.nodes.iter().enumerate() {
                let mut row = 0usize;
                for &p in &parent_idx[i] {
                    row = row * sizes[p] + digits[p];
                }
                amp *= node.amp(row, digits[i]);
                if amp.norm_sqr() == 0.0 {
                    break;
                }
            }
            if amp.norm_sqr() != 0.0 {
                visit(&digits, amp);
            }
        }
        Ok(())
    }

    fn flatten(positions: &[usize], sizes: &[usize], digits: &[usize]) -> usize {
        let mut k = 0usize;
        for &p in positions {
            k = k * sizes[p] + digits[p];
        }
        k
    }

    /// Joint distribution over the kept nodes of an all-classical net;
    /// traced and internal nodes are summed out.
    pub fn evaluate_classical(&self) -> Result<Dist> {
        for node in &self.nodes {
            if matches!(node.kind, NodeKind::Amplitude { .. }) {
                return Err(NetError::AmplitudeInClassical(node.name.clone()));
            }
        }
        let kept_axes = self.axes_of(&self.kept)?;
        let kept_dim: usize = kept_axes.iter().map(Axis::size).product::<usize>().max(1);
        if kept_dim > self.dim_cap {
            return Err(NetError::DimensionCap { dim: kept_dim, cap: self.dim_cap });
        }
        let sizes: Vec<usize> = self.nodes.iter().map(Node::arity).collect();
        let kept_pos: Vec<usize> =
            self.kept.iter().map(|n| self.node_index(n).expect("validated")).collect();
        let mut weights = vec![0.0; kept_dim];
        self.enumerate(|digits, amp| {
            weights[Self::flatten(&kept_pos, &sizes, digits)] += amp.re;
        })?;
        Ok(Dist::new(kept_axes, weights)?)
    }

    /// Density matrix over the kept nodes of an amplitude net: reservoirs
    /// are traced (matched between ket and bra), all other non-kept nodes
    /// are summed coherently.
    pub fn evaluate_quantum(&self) -> Result<DensityMatrix> {
        for node in &self.nodes {
            if matches!(node.kind, NodeKind::Classical { .. }) {
                return Err(NetError::ClassicalInQuantum(node.name.clone()));
            }
        }
        let kept_axes = self.axes_of(&self.kept)?;
        let kept_dim: usize = kept_axes.iter().map(Axis::size).product::<usize>().max(1);
        if kept_dim > self.dim_cap {
            return Err(NetError::DimensionCap { dim: kept_dim, cap: self.dim_cap });
        }
        let sizes: Vec<usize> = self.nodes.iter().map(Node::arity).collect();
        let kept_pos: Vec<usize> =
            self.kept.iter().map(|n| self.node_index(n).expect("validated")).collect();
        let traced_pos: Vec<usize> =
            self.reservoirs.iter().map(|n| self.node_index(n).expect("validated")).collect();
        let traced_dim: usize = traced_pos.iter().map(|&p| sizes[p]).product::<usize>().max(1);
        if kept_dim.saturating_mul(traced_dim) > CONFIG_CAP {
            return Err(NetError::ConfigSpace(kept_dim.saturating_mul(traced_dim)));
        }

        let mut psi = vec![Complex64::new(0.0, 0.0); kept_dim * traced_dim];
        self.enumerate(|digits, amp| {
            let k = Self::flatten(&kept_pos, &sizes, digits);
            let t = Self::flatten(&traced_pos, &sizes, digits);
            psi[k * traced_dim + t] += amp;
        })?;

        let mut rho = nalgebra::DMatrix::<Complex64>::zeros(kept_dim, kept_dim);
        for k1 in 0..kept_dim {
            for k2 in 0..kept_dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..traced_dim {
                    acc += psi[k1 * traced_dim + t] * psi[k2 * traced_dim + t].conj();
                }
                rho[(k1, k2)] = acc;
            }
        }
        Ok(DensityMatrix::new(kept_axes, rho)?)
    }

    fn is_sink(&self, name: &str) -> Result<bool> {
        self.node_index(name)?;
        Ok(self.children_of(name).is_empty())
    }

    fn is_source(&self, name: &str) -> Result<bool> {
        Ok(self.node(name)?.parents.is_empty())
    }

    /// Merges two traced reservoirs (both sinks or both sources) into one
    /// on the product alphabet. The evaluated state is unchanged.
    pub fn merge_reservoirs(&self, r1: &str, r2: &str) -> Result<NetSpec> {
        for r in [r1, r2] {
            if !self.reservoirs.iter().any(|n| n == r) {
                return Err(NetError::NotReservoir(r.to_string()));
            }
        }
        let sink1 = self.is_sink(r1)?;
        let sink2 = self.is_sink(r2)?;
        let source1 = self.is_source(r1)?;
        let source2 = self.is_source(r2)?;
        let merged_name = format!("({r1},{r2})");
        let n1 = self.node(r1)?.clone();
        let n2 = self.node(r2)?.clone();
        let merged_alphabet = Alphabet::product(&[&n1.labels, &n2.labels])?;

        if sink1 && sink2 {
            // Union of parents, r1's first; kernel is the product of the
            // two kernels at the projected parent configurations.
            let mut parents = n1.parents.clone();
            for p in &n2.parents {
                if !parents.contains(p) {
                    parents.push(p.clone());
                }
            }
            let parent_sizes: Vec<usize> =
                parents.iter().map(|p| self.node(p).map(Node::arity)).collect::<Result<_>>()?;
            let total: usize = parent_sizes.iter().product::<usize>().max(1);
            let project = |digits: &[usize], subset: &[String]| -> usize {
                let mut k = 0usize;
                for p in subset {
                    let slot = parents.iter().position(|q| q == p).expect("merged parent");
                    k = k * parent_sizes[slot] + digits[slot];
                }
                k
            };
            let mut rows = Vec::with_capacity(total);
            let mut digits = vec![0usize; parents.len()];
            for cfg in 0..total {
                let mut rem = cfg;
                for i in (0..parents.len()).rev() {
                    digits[i] = rem % parent_sizes[i];
                    rem /= parent_sizes[i];
                }
                let row1 = project(&digits, &n1.parents);
                let row2 = project(&digits, &n2.parents);
                let mut row =
                    Vec::with_capacity(n1.arity() * n2.arity());
                for c1 in 0..n1.arity() {
                    for c2 in 0..n2.arity() {
                        row.push(n1.amp(row1, c1) * n2.amp(row2, c2));
                    }
                }
                rows.push(row);
            }
            let merged = Node::amplitude(merged_name.clone(), merged_alphabet, parents, rows);

            let mut nodes: Vec<Node> =
                self.nodes.iter().filter(|n| n.name != r1 && n.name != r2).cloned().collect();
            nodes.push(merged);
            let mut reservoirs: Vec<String> = self
                .reservoirs
                .iter()
                .filter(|n| n.as_str() != r1 && n.as_str() != r2)
                .cloned()
                .collect();
            reservoirs.push(merged_name);
            NetSpec::new(nodes)?
                .with_reservoirs(reservoirs)?
                .with_kept(self.kept.clone())
                .map(|n| n.with_dimension_cap(self.dim_cap))
        } else if source1 && source2 {
            // One root on the product alphabet; children re-index the
            // pair value back into their original parent slots.
            let mut row = Vec::with_capacity(n1.arity() * n2.arity());
            for c1 in 0..n1.arity() {
                for c2 in 0..n2.arity() {
                    row.push(n1.amp(0, c1) * n2.amp(0, c2));
                }
            }
            let merged =
                Node::amplitude(merged_name.clone(), merged_alphabet, [], vec![row]);

            let mut nodes: Vec<Node> = vec![merged];
            for node in &self.nodes {
                if node.name == r1 || node.name == r2 {
                    continue;
                }
                if !node.parents.iter().any(|p| p == r1 || p == r2) {
                    nodes.push(node.clone());
                    continue;
                }
                nodes.push(self.reparent_onto_pair(node, r1, r2, &merged_name)?);
            }
            let mut reservoirs: Vec<String> = self
                .reservoirs
                .iter()
                .filter(|n| n.as_str() != r1 && n.as_str() != r2)
                .cloned()
                .collect();
            reservoirs.push(merged_name);
            NetSpec::new(nodes)?
                .with_reservoirs(reservoirs)?
                .with_kept(self.kept.clone())
                .map(|n| n.with_dimension_cap(self.dim_cap))
        } else if (sink1 && source2) || (source1 && sink2) {
            Err(NetError::MixedMerge)
        } else {
            Err(NetError::NotReservoir(format!("{r1}/{r2} are neither both sinks nor both sources")))
        }
    }

    /// Rewrites `node` so that parents `r1`/`r2` are read out of the
    /// single product-alphabet parent `pair`.
    fn reparent_onto_pair(&self, node: &Node, r1: &str, r2: &str, pair: &str) -> Result<Node> {
        let s1 = self.node(r1)?.arity();
        let s2 = self.node(r2)?.arity();
        let old_parents = &node.parents;
        let mut new_parents: Vec<String> = Vec::new();
        for p in old_parents {
            if p == r1 || p == r2 {
                if !new_parents.iter().any(|q| q == pair) {
                    new_parents.push(pair.to_string());
                }
            } else {
                new_parents.push(p.clone());
            }
        }
        let new_sizes: Vec<usize> = new_parents
            .iter()
            .map(|p| {
                if p == pair {
                    Ok(s1 * s2)
                } else {
                    self.node(p).map(Node::arity)
                }
            })
            .collect::<Result<_>>()?;
        let old_sizes: Vec<usize> =
            old_parents.iter().map(|p| self.node(p).map(Node::arity)).collect::<Result<_>>()?;
        let total: usize = new_sizes.iter().product::<usize>().max(1);
        let mut rows = Vec::with_capacity(total);
        let mut new_digits = vec![0usize; new_parents.len()];
        for cfg in 0..total {
            let mut rem = cfg;
            for i in (0..new_parents.len()).rev() {
                new_digits[i] = rem % new_sizes[i];
                rem /= new_sizes[i];
            }
            // Old parent digits: r1/r2 slots decode the pair value.
            let mut old_row = 0usize;
            for (slot, p) in old_parents.iter().enumerate() {
                let d = if p == r1 || p == r2 {
                    let pair_slot = new_parents.iter().position(|q| q == pair).expect("pair");
                    let pd = new_digits[pair_slot];
                    if p == r1 {
                        pd / s2
                    } else {
                        pd % s2
                    }
                } else {
                    let ns = new_parents.iter().position(|q| q == p).expect("kept parent");
                    new_digits[ns]
                };
                old_row = old_row * old_sizes[slot] + d;
            }
            rows.push((0..node.arity()).map(|c| node.amp(old_row, c)).collect());
        }
        Ok(Node::amplitude(node.name.clone(), node.labels.clone(), new_parents, rows))
    }

    /// Trades a traced reservoir at one end of a two-node chain for one
    /// at the other end, preserving the pointwise product
    /// `A(x|r) A(r) = A(r|x) A(x)` and the evaluated state.
    ///
    /// The new marginal amplitude is fixed by row normalization, so the
    /// relation is always satisfiable; value columns with zero mass get a
    /// point amplitude to stay normalized (they never contribute).
    pub fn trade_reservoir_direction(&self, r: &str) -> Result<NetSpec> {
        if !self.reservoirs.iter().any(|n| n == r) {
            return Err(NetError::NotReservoir(r.to_string()));
        }
        let rn = self.node(r)?.clone();
        let sink = self.is_sink(r)?;
        let source = self.is_source(r)?;

        let (x_name, b) = if sink {
            // r <- x with x a root: B(x, r) = A(r|x) A(x).
            if rn.parents.len() != 1 {
                return Err(NetError::UnsupportedTopology(format!(
                    "sink `{r}` must have exactly one parent"
                )));
            }
            let x = self.node(&rn.parents[0])?.clone();
            if !x.parents.is_empty() {
                return Err(NetError::UnsupportedTopology(format!(
                    "parent `{}` of `{r}` must be a root",
                    x.name
                )));
            }
            let mut b = vec![vec![Complex64::new(0.0, 0.0); rn.arity()]; x.arity()];
            for xv in 0..x.arity() {
                for rv in 0..rn.arity() {
                    b[xv][rv] = rn.amp(xv, rv) * x.amp(0, xv);
                }
            }
            (x.name.clone(), b)
        } else if source {
            // x <- r with x the only child and r its only parent:
            // B(x, r) = A(x|r) A(r).
            let children = self.children_of(r);
            if children.len() != 1 {
                return Err(NetError::UnsupportedTopology(format!(
                    "source `{r}` must have exactly one child"
                )));
            }
            let x = self.nodes[children[0]].clone();
            if x.parents.len() != 1 {
                return Err(NetError::UnsupportedTopology(format!(
                    "child `{}` of `{r}` must have no other parents",
                    x.name
                )));
            }
            let mut b = vec![vec![Complex64::new(0.0, 0.0); rn.arity()]; x.arity()];
            for rv in 0..rn.arity() {
                for xv in 0..x.arity() {
                    b[xv][rv] = x.amp(rv, xv) * rn.amp(0, rv);
                }
            }
            (x.name.clone(), b)
        } else {
            return Err(NetError::UnsupportedTopology(format!(
                "`{r}` is neither a sink nor a source"
            )));
        };

        let x_node = self.node(&x_name)?;
        let (nx, nr) = (x_node.arity(), rn.arity());

        if sink {
            // New direction: r is a root, x its child.
            let mut r_amp = vec![Complex64::new(0.0, 0.0); nr];
            for rv in 0..nr {
                let norm: f64 = (0..nx).map(|xv| b[xv][rv].norm_sqr()).sum();
                r_amp[rv] = Complex64::new(norm.sqrt(), 0.0);
            }
            let mut x_rows = vec![vec![Complex64::new(0.0, 0.0); nx]; nr];
            for rv in 0..nr {
                if r_amp[rv].re > 0.0 {
                    for xv in 0..nx {
                        x_rows[rv][xv] = b[xv][rv] / r_amp[rv];
                    }
                } else {
                    x_rows[rv][0] = Complex64::new(1.0, 0.0);
                }
            }
            let new_r = Node::amplitude_root(r.to_string(), r_amp);
            let new_x = Node::amplitude(
                x_name.clone(),
                x_node.labels.clone(),
                [r.to_string()],
                x_rows,
            );
            self.rebuild_after_trade(r, &x_name, new_r, new_x, true)
        } else {
            // New direction: x is a root, r its child.
            let mut x_amp = vec![Complex64::new(0.0, 0.0); nx];
            for xv in 0..nx {
                let norm: f64 = (0..nr).map(|rv| b[xv][rv].norm_sqr()).sum();
                x_amp[xv] = Complex64::new(norm.sqrt(), 0.0);
            }
            let mut r_rows = vec![vec![Complex64::new(0.0, 0.0); nr]; nx];
            for xv in 0..nx {
                if x_amp[xv].re > 0.0 {
                    for rv in 0..nr {
                        r_rows[xv][rv] = b[xv][rv] / x_amp[xv];
                    }
                } else {
                    r_rows[xv][0] = Complex64::new(1.0, 0.0);
                }
            }
            let new_x = Node::amplitude(
                x_name.clone(),
                x_node.labels.clone(),
                [],
                vec![x_amp],
            );
            let new_r =
                Node::amplitude(r.to_string(), rn.labels.clone(), [x_name.clone()], r_rows);
            self.rebuild_after_trade(r, &x_name, new_r, new_x, false)
        }
    }

    fn rebuild_after_trade(
        &self,
        r: &str,
        x: &str,
        new_r: Node,
        new_x: Node,
        r_becomes_root: bool,
    ) -> Result<NetSpec> {
        let mut nodes: Vec<Node> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            if node.name == r {
                continue;
            }
            if node.name == x {
                if r_becomes_root {
                    nodes.push(new_r.clone());
                    nodes.push(new_x.clone());
                } else {
                    nodes.push(new_x.clone());
                    nodes.push(new_r.clone());
                }
            } else {
                nodes.push(node.clone());
            }
        }
        NetSpec::new(nodes)?
            .with_reservoirs(self.reservoirs.clone())?
            .with_kept(self.kept.clone())
            .map(|n| n.with_dimension_cap(self.dim_cap))
    }
}
