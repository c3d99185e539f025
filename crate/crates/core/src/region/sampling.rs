use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::probkit::{Alphabet, Axis, Channel, Dist};
use crate::seeding::derive_seed;

use super::constraints::{constraints_classical, AuxiliaryModel, RatePoint, RegionConstraints};
use super::hull::{extreme_points, polytope_vertices};
use super::{RegionError, Result};

#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub samples: usize,
    pub seed: u64,
    /// Dirichlet concentration for every sampled simplex; 1.0 is
    /// uniform on the simplex.
    pub concentration: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { samples: 200, seed: 0, concentration: 1.0 }
    }
}

/// Union of sampled regions: every per-sample constraint set plus the
/// vertex list of the convex hull of all their polytopes. The hull is
/// convex by construction (it is defined as a hull), and it contains
/// every sampled region because each region is the hull of its own
/// vertices, all of which are fed in.
#[derive(Debug)]
pub struct RegionSample {
    pub constraints: Vec<RegionConstraints>,
    pub hull_vertices: Vec<RatePoint>,
}

/// Dirichlet(concentration) row via normalized Gamma draws;
/// concentration 1 reduces to normalized exponentials.
fn dirichlet_row(rng: &mut ChaCha12Rng, len: usize, concentration: f64) -> Vec<f64> {
    let gamma = rand_distr::Gamma::new(concentration, 1.0).expect("valid shape");
    let mut row: Vec<f64> = (0..len).map(|_| gamma.sample(rng).max(1e-300)) .collect();
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|w| *w /= sum);
    // Strict normalization for the constructors.
    let imax = row
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let s: f64 = row.iter().sum();
    row[imax] += 1.0 - s;
    row
}

/// One Dirichlet-sampled auxiliary for the channel's input alphabet.
pub fn random_auxiliary(
    rng: &mut ChaCha12Rng,
    x_axis: &Axis,
    n_u: usize,
    n_v: usize,
    concentration: f64,
) -> Result<AuxiliaryModel> {
    let u_axis = Axis::new("u", Alphabet::indexed(n_u)?);
    let v_axis = Axis::new("v", Alphabet::indexed(n_v)?);
    let dist_u = Dist::new(vec![u_axis.clone()], dirichlet_row(rng, n_u, concentration))?;
    let v_rows = (0..n_u).map(|_| dirichlet_row(rng, n_v, concentration)).collect();
    let chan_v = Channel::new(vec![u_axis], vec![v_axis.clone()], v_rows)?;
    let x_rows = (0..n_v).map(|_| dirichlet_row(rng, x_axis.size(), concentration)).collect();
    let chan_x = Channel::new(vec![v_axis], vec![x_axis.clone()], x_rows)?;
    AuxiliaryModel::new(dist_u, chan_v, chan_x)
}

/// Samples `cfg.samples` auxiliaries, evaluates each region, and
/// aggregates the hull of all their vertices. Sample `i` uses the
/// generator seeded with `derive_seed(cfg.seed, i)`, so parallel and
/// serial runs agree.
pub fn sample_region(
    channel: &Channel,
    n_u: usize,
    n_v: usize,
    cfg: &SamplerConfig,
) -> Result<RegionSample> {
    if cfg.samples == 0 {
        return Err(RegionError::BadConfig("sample count must be positive".into()));
    }
    if n_u < 1 || n_v < 1 {
        return Err(RegionError::BadConfig("n_u and n_v must be at least 1".into()));
    }
    if channel.input_axes().len() != 1 {
        return Err(RegionError::Composition("wiretap channel needs a single input axis".into()));
    }
    let x_axis = channel.input_axes()[0].clone();
    let constraints: Vec<RegionConstraints> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, i as u64));
            let aux = random_auxiliary(&mut rng, &x_axis, n_u, n_v, cfg.concentration)?;
            constraints_classical(channel, &aux)
        })
        .collect::<Result<_>>()?;

    let mut all_vertices = Vec::new();
    for c in &constraints {
        all_vertices.extend(polytope_vertices(c));
    }
    let hull_vertices = extreme_points(&all_vertices, 1e-9);
    Ok(RegionSample { constraints, hull_vertices })
}
