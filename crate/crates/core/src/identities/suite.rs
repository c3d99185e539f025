use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crate::probkit::{Alphabet, Axis, Dist};
use crate::seeding::derive_seed;

use super::checks::*;
use super::model::{ModelState, WiretapModel};
use super::{IdentityReport, Result};

/// Suite parameters. Classical models keep `n <= max_n` letters over
/// alphabets of size at most `max_alphabet`; quantum models are qubit
/// blocks with `n <= max_quantum_n` (total dimension `4^(1+n)`).
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub classical_cases: usize,
    pub quantum_cases: usize,
    pub max_n: usize,
    pub max_alphabet: usize,
    pub max_quantum_n: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            classical_cases: 200,
            quantum_cases: 100,
            max_n: 3,
            max_alphabet: 3,
            max_quantum_n: 2,
        }
    }
}

/// A random wiretap-net joint: uniform messages, a random deterministic
/// codebook, and a memoryless channel with random rows, marginalized
/// down to `(s, t, y^n, z^n)`.
pub fn random_classical_model(rng: &mut ChaCha12Rng, max_n: usize, max_alphabet: usize) -> WiretapModel {
    let n = rng.gen_range(1..=max_n);
    let n_s = rng.gen_range(2..=max_alphabet);
    let n_t = rng.gen_range(2..=max_alphabet);
    let n_x = rng.gen_range(2..=max_alphabet);
    let n_y = rng.gen_range(2..=max_alphabet);
    let n_z = rng.gen_range(2..=max_alphabet);

    // Codebook x^n(s,t) and per-letter channel rows P(y,z|x).
    let codebook: Vec<Vec<usize>> =
        (0..n_s * n_t).map(|_| (0..n).map(|_| rng.gen_range(0..n_x)).collect()).collect();
    let channel: Vec<Vec<f64>> = (0..n_x)
        .map(|_| {
            let mut row: Vec<f64> = (0..n_y * n_z).map(|_| rng.gen::<f64>().max(1e-6)).collect();
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|w| *w /= s);
            row
        })
        .collect();

    let mut axes = vec![
        Axis::new("s", Alphabet::indexed(n_s).unwrap()),
        Axis::new("t", Alphabet::indexed(n_t).unwrap()),
    ];
    let mut y_names = Vec::new();
    let mut z_names = Vec::new();
    for j in 1..=n {
        axes.push(Axis::new(format!("y{j}"), Alphabet::indexed(n_y).unwrap()));
        y_names.push(format!("y{j}"));
    }
    for j in 1..=n {
        axes.push(Axis::new(format!("z{j}"), Alphabet::indexed(n_z).unwrap()));
        z_names.push(format!("z{j}"));
    }

    let block = n_y.pow(n as u32) * n_z.pow(n as u32);
    let mut weights = vec![0.0; n_s * n_t * block];
    let prior = 1.0 / (n_s * n_t) as f64;
    for s in 0..n_s {
        for t in 0..n_t {
            let x_word = &codebook[s * n_t + t];
            // Joint index layout: (s, t, y_1..y_n, z_1..z_n).
            for yz in 0..block {
                let mut rem = yz;
                let mut z_digits = vec![0usize; n];
                for j in (0..n).rev() {
                    z_digits[j] = rem % n_z;
                    rem /= n_z;
                }
                let mut y_digits = vec![0usize; n];
                for j in (0..n).rev() {
                    y_digits[j] = rem % n_y;
                    rem /= n_y;
                }
                let mut w = prior;
                for j in 0..n {
                    w *= channel[x_word[j]][y_digits[j] * n_z + z_digits[j]];
                }
                weights[(s * n_t + t) * block + yz] = w;
            }
        }
    }
    let dist = Dist::new(axes, weights).expect("constructed normalized");
    WiretapModel::new(ModelState::Classical(dist), "s", "t", y_names, z_names)
        .expect("blocks present")
}

/// A random density matrix over qubit blocks `(s, t, y^n, z^n)` —
/// arbitrary entanglement across all blocks, since the identities hold
/// for every state.
pub fn random_quantum_model(rng: &mut ChaCha12Rng, max_n: usize) -> WiretapModel {
    let n = rng.gen_range(1..=max_n);
    let mut factors = vec![Axis::bit("s"), Axis::bit("t")];
    let mut y_names = Vec::new();
    let mut z_names = Vec::new();
    for j in 1..=n {
        factors.push(Axis::bit(format!("y{j}")));
        y_names.push(format!("y{j}"));
    }
    for j in 1..=n {
        factors.push(Axis::bit(format!("z{j}")));
        z_names.push(format!("z{j}"));
    }
    let dim: usize = factors.iter().map(Axis::size).product();
    let rho = crate::testutil::random_density(rng, factors, dim);
    WiretapModel::new(ModelState::Quantum(rho), "s", "t", y_names, z_names)
        .expect("blocks present")
}

/// All equality families on one model.
pub fn run_model_checks(m: &WiretapModel) -> Result<Vec<IdentityReport>> {
    let state = m.state();
    let mut reports = Vec::with_capacity(16);
    reports.push(check_mi_swap(state, &[m.secret()], &m.y_block(), &m.z_block())?);
    reports.push(check_sigma_equality(state, &m.y_block(), &m.z_block(), &[])?);
    reports.push(check_sigma_equality(state, &m.y_block(), &m.z_block(), &[m.shared()])?);
    reports.push(check_sigma_equality(
        state,
        &m.y_block(),
        &m.z_block(),
        &[m.secret(), m.shared()],
    )?);
    reports.extend(check_block_mi_decomposition(m)?);
    reports.extend(check_block_cmi_decomposition(m)?);
    reports.push(check_cross_block_difference(m)?);
    reports.extend(check_delta_identities(m)?);
    reports.extend(check_rate_identities(m)?);
    Ok(reports)
}

/// Runs the seeded random-model suite: `classical_cases` wiretap joints
/// checked with Shannon entropies, then `quantum_cases` density matrices
/// checked with von Neumann entropies. Every report carries the
/// generator seed of its case.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    let mut reports = Vec::new();
    for case in 0..cfg.classical_cases {
        let case_seed = derive_seed(cfg.seed, case as u64);
        let mut rng = ChaCha12Rng::seed_from_u64(case_seed);
        let model = random_classical_model(&mut rng, cfg.max_n, cfg.max_alphabet);
        for r in run_model_checks(&model)? {
            reports.push(r.tagged(case_seed, case));
        }
    }
    for case in 0..cfg.quantum_cases {
        let case_seed = derive_seed(cfg.seed ^ 0x5155_414e_5455_4d21, case as u64);
        let mut rng = ChaCha12Rng::seed_from_u64(case_seed);
        let model = random_quantum_model(&mut rng, cfg.max_quantum_n);
        for r in run_model_checks(&model)? {
            let mut r = r.tagged(case_seed, cfg.classical_cases + case);
            r.name = format!("{}(S)", r.name);
            reports.push(r);
        }
    }
    Ok(reports)
}
