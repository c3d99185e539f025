//! Shared fixtures for unit, integration, and acceptance tests.
#![doc(hidden)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crate::probkit::{Alphabet, Axis, Channel, Dist};
use crate::quantkit::DensityMatrix;
use crate::region::AuxiliaryModel;

/// Random joint distribution with strictly positive weights.
pub fn random_dist(rng: &mut ChaCha12Rng, axes: Vec<Axis>) -> Dist {
    let n: usize = axes.iter().map(Axis::size).product();
    let mut w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().max(1e-9)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    Dist::new(axes, w).unwrap()
}

/// Random row-stochastic channel with strictly positive rows.
pub fn random_channel(rng: &mut ChaCha12Rng, input: Vec<Axis>, output: Vec<Axis>) -> Channel {
    let n_in: usize = input.iter().map(Axis::size).product();
    let n_out: usize = output.iter().map(Axis::size).product();
    let rows = (0..n_in)
        .map(|_| {
            let mut row: Vec<f64> = (0..n_out).map(|_| rng.gen::<f64>().max(1e-6)).collect();
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
            row
        })
        .collect();
    Channel::new(input, output, rows).unwrap()
}

/// Ginibre-construction random density matrix, `G G^H` normalized, with
/// the rank bounded by `rank_cap` columns.
pub fn random_density(rng: &mut ChaCha12Rng, factors: Vec<Axis>, rank_cap: usize) -> DensityMatrix {
    let dim: usize = factors.iter().map(Axis::size).product();
    let g = DMatrix::<Complex64>::from_fn(dim, rank_cap.min(dim).max(1), |_, _| {
        Complex64::new(
            rand_distr::StandardNormal.sample(rng),
            rand_distr::StandardNormal.sample(rng),
        )
    });
    let m = &g * g.adjoint();
    let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
    DensityMatrix::new(factors, m / Complex64::new(tr, 0.0)).unwrap()
}

/// Random diagonal (classical) density matrix with positive spectrum.
pub fn random_diagonal(rng: &mut ChaCha12Rng, factors: Vec<Axis>) -> DensityMatrix {
    let dim: usize = factors.iter().map(Axis::size).product();
    let mut w: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() + 1e-6).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    DensityMatrix::diagonal(factors, &w).unwrap()
}

/// Wiretap channel with conditionally independent flips: the legitimate
/// output is a BSC(`p_main`) of the input and the eavesdropper output an
/// independent BSC(`p_tap`). Marginally this is the degraded pair used in
/// the capacity fixtures.
pub fn bsc_pair(p_main: f64, p_tap: f64) -> Channel {
    let y = Channel::binary_symmetric("x", "y", p_main).unwrap();
    let z = Channel::binary_symmetric("x", "z", p_tap).unwrap();
    Channel::conditionally_independent(&y, &z).unwrap()
}

/// Trivial-U auxiliary with V = X sent uniformly: the capacity-achieving
/// shape for the symmetric degraded pair.
pub fn uniform_identity_aux() -> AuxiliaryModel {
    let u = Axis::new("u", Alphabet::indexed(1).unwrap());
    let v = Axis::bit("v");
    let x = Axis::bit("x");
    AuxiliaryModel::new(
        Dist::uniform(vec![u.clone()]).unwrap(),
        Channel::new(vec![u], vec![v.clone()], vec![vec![0.5, 0.5]]).unwrap(),
        Channel::new(vec![v], vec![x], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
    )
    .unwrap()
}
