use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::netkit::{NetSpec, Node};
use crate::probkit::{
    conditional_mutual_information as cmi, joint_from_factors, mutual_information as mi, Alphabet,
    Axis, Channel, Dist,
};
use crate::quantkit::{DensityMatrix, Isometry};

use super::{RegionError, Result, MEMBERSHIP_TOL};

/// A rate triple in nats per channel use: equivocation, secret rate,
/// tapped rate. `0 <= r_e <= r_s` and `r_t >= 0` always hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r_e: f64,
    pub r_s: f64,
    pub r_t: f64,
}

impl RatePoint {
    pub fn new(r_e: f64, r_s: f64, r_t: f64) -> Result<Self> {
        if !(r_s >= 0.0) {
            return Err(RegionError::InvalidRate(format!("r_s >= 0 (got {r_s})")));
        }
        if !(r_t >= 0.0) {
            return Err(RegionError::InvalidRate(format!("r_t >= 0 (got {r_t})")));
        }
        if !(0.0 <= r_e && r_e <= r_s) {
            return Err(RegionError::InvalidRate(format!("0 <= r_e <= r_s (got r_e={r_e}, r_s={r_s})")));
        }
        Ok(Self { r_e, r_s, r_t })
    }

    pub fn origin() -> Self {
        Self { r_e: 0.0, r_s: 0.0, r_t: 0.0 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r_e, self.r_s, self.r_t]
    }
}

/// The joint state the constraints were evaluated on.
#[derive(Debug, Clone)]
pub enum ConstraintSource {
    Classical(Dist),
    Quantum(DensityMatrix),
}

/// The four one-letter informations that cut out one rate region,
/// together with the state they were evaluated at.
#[derive(Debug, Clone)]
pub struct RegionConstraints {
    pub i_diff: f64,
    pub i_v: f64,
    pub i_yu: f64,
    pub i_zu: f64,
    pub source: ConstraintSource,
}

impl RegionConstraints {
    /// `min(I(y:u), I(z:u))` — the shared-message bottleneck.
    pub fn ell(&self) -> f64 {
        self.i_yu.min(self.i_zu)
    }

    /// Closed-region membership. `i_diff < 0` leaves no admissible
    /// equivocation at all (even the origin fails `r_e <= i_diff`).
    pub fn contains(&self, r: &RatePoint) -> bool {
        let ell = self.ell();
        r.r_e <= self.i_diff + MEMBERSHIP_TOL
            && r.r_s + r.r_t <= self.i_v + ell + MEMBERSHIP_TOL
            && r.r_t <= ell + MEMBERSHIP_TOL
    }
}

/// Channel-prefixing auxiliaries: `P(u)`, `P(v|u)`, `P(x|v)`. Composed
/// with the fixed wiretap channel they induce the joint
/// `P(y,z,v,u) = sum_x P(y,z|x) P(x|v) P(v|u) P(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AuxRepr", into = "AuxRepr")]
pub struct AuxiliaryModel {
    pub dist_u: Dist,
    pub chan_v_given_u: Channel,
    pub chan_x_given_v: Channel,
}

const AUX_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct AuxRepr {
    schema_version: u32,
    dist_u: Dist,
    chan_v_given_u: Channel,
    chan_x_given_v: Channel,
}

impl TryFrom<AuxRepr> for AuxiliaryModel {
    type Error = RegionError;
    fn try_from(r: AuxRepr) -> Result<Self> {
        if r.schema_version != AUX_SCHEMA_VERSION {
            return Err(RegionError::BadConfig(format!(
                "unsupported auxiliary schema_version {}",
                r.schema_version
            )));
        }
        AuxiliaryModel::new(r.dist_u, r.chan_v_given_u, r.chan_x_given_v)
    }
}

impl From<AuxiliaryModel> for AuxRepr {
    fn from(a: AuxiliaryModel) -> Self {
        AuxRepr {
            schema_version: AUX_SCHEMA_VERSION,
            dist_u: a.dist_u,
            chan_v_given_u: a.chan_v_given_u,
            chan_x_given_v: a.chan_x_given_v,
        }
    }
}

impl AuxiliaryModel {
    pub fn new(dist_u: Dist, chan_v_given_u: Channel, chan_x_given_v: Channel) -> Result<Self> {
        if dist_u.axes().len() != 1 {
            return Err(RegionError::Composition("the u prior must have exactly one axis".into()));
        }
        if chan_v_given_u.input_axes() != dist_u.axes() {
            return Err(RegionError::Composition("v-kernel input must be the u axis".into()));
        }
        if chan_v_given_u.output_axes().len() != 1 || chan_x_given_v.output_axes().len() != 1 {
            return Err(RegionError::Composition("v and x must be single axes".into()));
        }
        if chan_x_given_v.input_axes() != chan_v_given_u.output_axes() {
            return Err(RegionError::Composition("x-kernel input must be the v axis".into()));
        }
        Ok(Self { dist_u, chan_v_given_u, chan_x_given_v })
    }

    pub fn u_name(&self) -> &str {
        &self.dist_u.axes()[0].name
    }

    pub fn v_name(&self) -> &str {
        &self.chan_v_given_u.output_axes()[0].name
    }

    pub fn x_axis(&self) -> &Axis {
        &self.chan_x_given_v.output_axes()[0]
    }

    pub fn n_u(&self) -> usize {
        self.dist_u.weights().len()
    }

    pub fn n_v(&self) -> usize {
        self.chan_v_given_u.output_size()
    }

    /// The joint over `(y, z, v, u)` induced with the given channel.
    pub fn induced_joint(&self, channel: &Channel) -> Result<Dist> {
        if channel.input_axes() != std::slice::from_ref(self.x_axis()) {
            return Err(RegionError::Composition(format!(
                "channel input axis does not match encoder output `{}`",
                self.x_axis().name
            )));
        }
        if channel.output_axes().len() != 2 {
            return Err(RegionError::Composition(
                "wiretap channel must have exactly two output axes (receiver, eavesdropper)"
                    .into(),
            ));
        }
        let joint = joint_from_factors(&[
            self.dist_u.clone().into(),
            self.chan_v_given_u.clone().into(),
            self.chan_x_given_v.clone().into(),
            channel.clone().into(),
        ])?;
        let y = channel.output_axes()[0].name.clone();
        let z = channel.output_axes()[1].name.clone();
        Ok(joint.marginal(&[&y, &z, self.v_name(), self.u_name()])?)
    }

    /// Time-shared mixture of two auxiliaries for the same channel: a
    /// fresh binary switch is absorbed into both `u` and `v` as a
    /// disjoint union, so each branch plays its own strategy with
    /// probability `weight` / `1 - weight`.
    pub fn time_share(&self, other: &AuxiliaryModel, weight: f64) -> Result<AuxiliaryModel> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(RegionError::BadConfig(format!("weight must be in [0,1], got {weight}")));
        }
        if self.x_axis() != other.x_axis() {
            return Err(RegionError::Composition(
                "time sharing needs a common encoder output alphabet".into(),
            ));
        }
        let tag = |which: usize, labels: &Alphabet| -> Vec<String> {
            labels.labels().iter().map(|l| format!("{which}:{l}")).collect()
        };
        let u_labels: Vec<String> = tag(0, &self.dist_u.axes()[0].labels)
            .into_iter()
            .chain(tag(1, &other.dist_u.axes()[0].labels))
            .collect();
        let v_labels: Vec<String> = tag(0, &self.chan_v_given_u.output_axes()[0].labels)
            .into_iter()
            .chain(tag(1, &other.chan_v_given_u.output_axes()[0].labels))
            .collect();
        let u_axis = Axis::new(self.u_name(), Alphabet::new(u_labels)?);
        let v_axis = Axis::new(self.v_name(), Alphabet::new(v_labels)?);
        let (nu0, nu1) = (self.n_u(), other.n_u());
        let (nv0, nv1) = (self.n_v(), other.n_v());

        let mut u_weights = Vec::with_capacity(nu0 + nu1);
        u_weights.extend(self.dist_u.weights().iter().map(|w| w * weight));
        u_weights.extend(other.dist_u.weights().iter().map(|w| w * (1.0 - weight)));
        let dist_u = Dist::new(vec![u_axis.clone()], u_weights)?;

        let mut v_rows = Vec::with_capacity(nu0 + nu1);
        for i in 0..nu0 {
            let mut row = vec![0.0; nv0 + nv1];
            row[..nv0].copy_from_slice(self.chan_v_given_u.row(i));
            v_rows.push(row);
        }
        for i in 0..nu1 {
            let mut row = vec![0.0; nv0 + nv1];
            row[nv0..].copy_from_slice(other.chan_v_given_u.row(i));
            v_rows.push(row);
        }
        let chan_v = Channel::new(vec![u_axis], vec![v_axis.clone()], v_rows)?;

        let mut x_rows = Vec::with_capacity(nv0 + nv1);
        for j in 0..nv0 {
            x_rows.push(self.chan_x_given_v.row(j).to_vec());
        }
        for j in 0..nv1 {
            x_rows.push(other.chan_x_given_v.row(j).to_vec());
        }
        let chan_x = Channel::new(vec![v_axis], vec![self.x_axis().clone()], x_rows)?;

        AuxiliaryModel::new(dist_u, chan_v, chan_x)
    }
}

fn informations(
    state: &impl crate::probkit::EntropySource,
    y: &str,
    z: &str,
    v: &str,
    u: &str,
) -> Result<(f64, f64, f64, f64)> {
    let i_v = cmi(state, &[y], &[v], &[u])?;
    let i_zv = cmi(state, &[z], &[v], &[u])?;
    let i_yu = mi(state, &[y], &[u])?;
    let i_zu = mi(state, &[z], &[u])?;
    Ok((i_v - i_zv, i_v, i_yu, i_zu))
}

/// Evaluates the four region informations for a classical channel and
/// auxiliary.
pub fn constraints_classical(
    channel: &Channel,
    aux: &AuxiliaryModel,
) -> Result<RegionConstraints> {
    let joint = aux.induced_joint(channel)?;
    let y = channel.output_axes()[0].name.clone();
    let z = channel.output_axes()[1].name.clone();
    let (i_diff, i_v, i_yu, i_zu) = informations(&joint, &y, &z, aux.v_name(), aux.u_name())?;
    Ok(RegionConstraints { i_diff, i_v, i_yu, i_zu, source: ConstraintSource::Classical(joint) })
}

/// How the traced reservoir couples to the quantum auxiliary net.
#[derive(Debug, Clone)]
pub enum ReservoirSpec {
    /// No reservoir: the evaluated state is pure.
    None,
    /// A sink that copies the named nodes in the computational basis
    /// (dephasing them). Nodes may be any of `u`, `v`, `x`, `yz`, or the
    /// output copies `y`, `z`.
    Dephase { on: Vec<String> },
    /// Arbitrary sink amplitude `A(r|parents)`; rows indexed by the
    /// parents' joint configuration in the order given.
    Custom { parents: Vec<String>, size: usize, rows: Vec<Vec<Complex64>> },
}

impl Default for ReservoirSpec {
    fn default() -> Self {
        // A full-rank dephasing on u gives mixed-state auxiliaries.
        ReservoirSpec::Dephase { on: vec!["u".into()] }
    }
}

/// Quantum auxiliaries: root amplitude on `u`, amplitudes `A(v|u)` and
/// `A(x|v,u)` (note the extra `u` dependence), plus the reservoir
/// coupling. Row indices for `A(x|v,u)` run over `(v, u)` with `v`
/// major.
#[derive(Debug, Clone)]
pub struct QuantumAuxiliary {
    pub amp_u: Vec<Complex64>,
    pub amp_v_given_u: Vec<Vec<Complex64>>,
    pub amp_x_given_vu: Vec<Vec<Complex64>>,
    pub reservoir: ReservoirSpec,
}

impl QuantumAuxiliary {
    pub fn n_u(&self) -> usize {
        self.amp_u.len()
    }

    pub fn n_v(&self) -> usize {
        self.amp_v_given_u.first().map_or(0, Vec::len)
    }

    pub fn n_x(&self) -> usize {
        self.amp_x_given_vu.first().map_or(0, Vec::len)
    }
}

/// Evaluates the region informations for an isometric channel amplitude
/// `A(y,z|x)` and quantum auxiliaries, with von Neumann entropies on the
/// evaluated state over `(y, z, v, u)`.
pub fn constraints_quantum(
    channel: &Isometry,
    aux: &QuantumAuxiliary,
) -> Result<RegionConstraints> {
    if channel.output_axes().len() != 2 {
        return Err(RegionError::Composition(
            "channel isometry must output exactly two factors (receiver, eavesdropper)".into(),
        ));
    }
    if channel.input_dim() != aux.n_x() {
        return Err(RegionError::Composition(format!(
            "channel input dimension {} does not match encoder output {}",
            channel.input_dim(),
            aux.n_x()
        )));
    }
    let y_alpha = channel.output_axes()[0].labels.clone();
    let z_alpha = channel.output_axes()[1].labels.clone();
    let y_name = channel.output_axes()[0].name.clone();
    let z_name = channel.output_axes()[1].name.clone();
    let pair_size = y_alpha.size() * z_alpha.size();

    // Channel rows for the pair node: one row per x, the isometry column.
    let channel_rows: Vec<Vec<Complex64>> = (0..channel.input_dim())
        .map(|x| (0..pair_size).map(|yz| channel.entries()[(yz, x)]).collect())
        .collect();

    let mut nodes = vec![
        Node::amplitude_root("u", aux.amp_u.clone()),
        Node::amplitude(
            "v",
            Alphabet::indexed(aux.n_v())?,
            ["u".to_string()],
            aux.amp_v_given_u.clone(),
        ),
        Node::amplitude(
            "x",
            Alphabet::indexed(aux.n_x())?,
            ["v".to_string(), "u".to_string()],
            aux.amp_x_given_vu.clone(),
        ),
        Node::amplitude(
            "yz",
            Alphabet::product(&[&y_alpha, &z_alpha])?,
            ["x".to_string()],
            channel_rows,
        ),
        Node::delta_component(y_name.clone(), "yz", &[&y_alpha, &z_alpha], 0),
        Node::delta_component(z_name.clone(), "yz", &[&y_alpha, &z_alpha], 1),
    ];

    let mut reservoirs = Vec::new();
    match &aux.reservoir {
        ReservoirSpec::None => {}
        ReservoirSpec::Dephase { on } => {
            let parts: Vec<Alphabet> = on
                .iter()
                .map(|n| {
                    nodes
                        .iter()
                        .find(|node| node.name == *n)
                        .map(|node| node.labels.clone())
                        .ok_or_else(|| {
                            RegionError::Composition(format!("dephasing target `{n}` not in net"))
                        })
                })
                .collect::<Result<_>>()?;
            let part_refs: Vec<&Alphabet> = parts.iter().collect();
            let size: usize = parts.iter().map(Alphabet::size).product();
            let mut rows = Vec::with_capacity(size);
            for cfg in 0..size {
                let mut row = vec![Complex64::new(0.0, 0.0); size];
                row[cfg] = Complex64::new(1.0, 0.0);
                rows.push(row);
            }
            nodes.push(Node::amplitude(
                "r",
                Alphabet::product(&part_refs)?,
                on.clone(),
                rows,
            ));
            reservoirs.push("r".to_string());
        }
        ReservoirSpec::Custom { parents, size, rows } => {
            nodes.push(Node::amplitude("r", Alphabet::indexed(*size)?, parents.clone(), rows.clone()));
            reservoirs.push("r".to_string());
        }
    }

    let net = NetSpec::new(nodes)?
        .with_reservoirs(reservoirs)?
        .with_kept([y_name.clone(), z_name.clone(), "v".into(), "u".into()])?;
    let rho = net.evaluate_quantum()?;
    let (i_diff, i_v, i_yu, i_zu) = informations(&rho, &y_name, &z_name, "v", "u")?;
    Ok(RegionConstraints { i_diff, i_v, i_yu, i_zu, source: ConstraintSource::Quantum(rho) })
}

/// The general-to-factored replacement: swaps `P(y,z|v,u)` for the
/// product of its conditionals, `P(y|v,u) P(z|v,u)`, leaving the
/// `(y,v,u)` and `(z,v,u)` marginals — and therefore every region
/// constraint — unchanged.
pub fn factor_outputs(joint: &Dist, y: &str, z: &str, v: &str, u: &str) -> Result<Dist> {
    let p_yvu = joint.marginal(&[y, v, u])?;
    let p_zvu = joint.marginal(&[z, v, u])?;
    let p_vu = joint.marginal(&[v, u])?;
    let axes = [y, z, v, u];
    let sizes: Vec<usize> = axes
        .iter()
        .map(|n| joint.axis(n).map(|a| a.size()))
        .collect::<crate::probkit::Result<_>>()?;
    let mut weights = Vec::with_capacity(sizes.iter().product());
    for yi in 0..sizes[0] {
        for zi in 0..sizes[1] {
            for vi in 0..sizes[2] {
                for ui in 0..sizes[3] {
                    let pvu = p_vu.weight_at(&[vi, ui]);
                    let w = if pvu > 0.0 {
                        p_yvu.weight_at(&[yi, vi, ui]) * p_zvu.weight_at(&[zi, vi, ui]) / pvu
                    } else {
                        0.0
                    };
                    weights.push(w);
                }
            }
        }
    }
    let out_axes: Vec<Axis> = axes
        .iter()
        .map(|n| joint.axis(n).cloned())
        .collect::<crate::probkit::Result<_>>()?;
    Ok(Dist::new(out_axes, weights)?)
}
