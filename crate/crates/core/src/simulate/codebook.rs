use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crate::probkit::Channel;
use crate::region::AuxiliaryModel;

use super::{Result, SimError};

/// The three-tier random codebook. Shapes: `u_words` is `n_t x n`,
/// `v_words` and `x_words` are `n_s*n_t x n` with message `(s, t)` at
/// row `s * n_t + t`.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub n: usize,
    pub n_s: usize,
    pub n_t: usize,
    pub u_words: Vec<Vec<usize>>,
    pub v_words: Vec<Vec<usize>>,
    pub x_words: Vec<Vec<usize>>,
    pub generator: AuxiliaryModel,
    pub seed: u64,
}

impl Codebook {
    /// Validated assembly from explicit words (tests build tiny
    /// codebooks by hand this way).
    pub fn from_words(
        generator: AuxiliaryModel,
        n: usize,
        n_s: usize,
        n_t: usize,
        u_words: Vec<Vec<usize>>,
        v_words: Vec<Vec<usize>>,
        x_words: Vec<Vec<usize>>,
        seed: u64,
    ) -> Result<Self> {
        if u_words.len() != n_t || v_words.len() != n_s * n_t || x_words.len() != n_s * n_t {
            return Err(SimError::WordLength {
                got: u_words.len() + v_words.len() + x_words.len(),
                expected: n_t + 2 * n_s * n_t,
            });
        }
        let sizes = [
            generator.n_u(),
            generator.n_v(),
            generator.x_axis().size(),
        ];
        for (words, size) in [(&u_words, sizes[0]), (&v_words, sizes[1]), (&x_words, sizes[2])] {
            for w in words.iter() {
                if w.len() != n {
                    return Err(SimError::WordLength { got: w.len(), expected: n });
                }
                for &sym in w {
                    if sym >= size {
                        return Err(SimError::SymbolRange { symbol: sym, size });
                    }
                }
            }
        }
        Ok(Self { n, n_s, n_t, u_words, v_words, x_words, generator, seed })
    }

    pub fn row(&self, s: usize, t: usize) -> usize {
        s * self.n_t + t
    }

    pub fn check_message(&self, s: usize, t: usize) -> Result<()> {
        if s >= self.n_s || t >= self.n_t {
            return Err(SimError::MessageRange { s, t, n_s: self.n_s, n_t: self.n_t });
        }
        Ok(())
    }
}

fn sample_row(rng: &mut ChaCha12Rng, row: &[f64]) -> usize {
    let mut r: f64 = rng.gen();
    for (i, &w) in row.iter().enumerate() {
        r -= w;
        if r < 0.0 {
            return i;
        }
    }
    row.len() - 1
}

/// Per-letter i.i.d. sampling of the three tiers, in a fixed order
/// (all `u` words by ascending `t` then letter, all `v` words by
/// ascending `(s, t)` row then letter, then all `x` words), so a seed
/// pins the codebook bit-for-bit.
pub fn build_codebook(
    aux: &AuxiliaryModel,
    n: usize,
    n_s: usize,
    n_t: usize,
    seed: u64,
) -> Result<Codebook> {
    if n == 0 || n_s == 0 || n_t == 0 {
        return Err(SimError::BadConfig("n, n_s, n_t must all be positive".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let pu = aux.dist_u.weights();
    let u_words: Vec<Vec<usize>> =
        (0..n_t).map(|_| (0..n).map(|_| sample_row(&mut rng, pu)).collect()).collect();
    let mut v_words = vec![Vec::new(); n_s * n_t];
    for s in 0..n_s {
        for t in 0..n_t {
            let w: Vec<usize> = (0..n)
                .map(|j| sample_row(&mut rng, aux.chan_v_given_u.row(u_words[t][j])))
                .collect();
            v_words[s * n_t + t] = w;
        }
    }
    let mut x_words = vec![Vec::new(); n_s * n_t];
    for s in 0..n_s {
        for t in 0..n_t {
            let w: Vec<usize> = (0..n)
                .map(|j| sample_row(&mut rng, aux.chan_x_given_v.row(v_words[s * n_t + t][j])))
                .collect();
            x_words[s * n_t + t] = w;
        }
    }
    Codebook::from_words(aux.clone(), n, n_s, n_t, u_words, v_words, x_words, seed)
}

/// Memoryless transmission of message `(s, t)`: each letter samples the
/// joint output pair from the channel row at `x_j(s, t)`.
pub fn transmit(
    cb: &Codebook,
    s: usize,
    t: usize,
    channel: &Channel,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    cb.check_message(s, t)?;
    let n_z = channel.output_axes()[1].size();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut y = Vec::with_capacity(cb.n);
    let mut z = Vec::with_capacity(cb.n);
    for j in 0..cb.n {
        let x = cb.x_words[cb.row(s, t)][j];
        let yz = sample_row(&mut rng, channel.row(x));
        y.push(yz / n_z);
        z.push(yz % n_z);
    }
    Ok((y, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::{Alphabet, Axis, Dist};
    use crate::testutil::{bsc_pair, uniform_identity_aux};

    fn deterministic_aux() -> AuxiliaryModel {
        // Point-mass kernels: u always 0, v copies u, x copies v.
        let u = Axis::new("u", Alphabet::indexed(2).unwrap());
        let v = Axis::bit("v");
        let x = Axis::bit("x");
        AuxiliaryModel::new(
            Dist::new(vec![u.clone()], vec![1.0, 0.0]).unwrap(),
            Channel::new(vec![u], vec![v.clone()], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            Channel::new(vec![v], vec![x], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn deterministic_generator_gives_identical_words() {
        let cb = build_codebook(&deterministic_aux(), 6, 3, 2, 11).unwrap();
        for t in 0..2 {
            assert_eq!(cb.u_words[t], vec![0; 6]);
        }
        for row in &cb.v_words {
            assert_eq!(row, &vec![0; 6]);
        }
        for row in &cb.x_words {
            assert_eq!(row, &vec![0; 6]);
        }
    }

    #[test]
    fn single_message_codebook() {
        let cb = build_codebook(&uniform_identity_aux(), 4, 1, 1, 3).unwrap();
        assert_eq!(cb.u_words.len(), 1);
        assert_eq!(cb.v_words.len(), 1);
        assert_eq!(cb.x_words.len(), 1);
        assert_eq!(cb.x_words[0].len(), 4);
    }

    #[test]
    fn codebook_letter_frequencies_match_generator() {
        // Seeded 10^4-letter codebook: empirical frequencies within 3
        // sigma multinomial bounds of P(u), P(v|u), P(x|v).
        let u = Axis::new("u", Alphabet::indexed(2).unwrap());
        let v = Axis::bit("v");
        let x = Axis::bit("x");
        let aux = AuxiliaryModel::new(
            Dist::new(vec![u.clone()], vec![0.3, 0.7]).unwrap(),
            Channel::new(vec![u], vec![v.clone()], vec![vec![0.8, 0.2], vec![0.4, 0.6]]).unwrap(),
            Channel::new(vec![v], vec![x], vec![vec![0.9, 0.1], vec![0.25, 0.75]]).unwrap(),
        )
        .unwrap();
        let n = 10_000;
        let cb = build_codebook(&aux, n, 1, 1, 0).unwrap();
        let nf = n as f64;

        let u_ones = cb.u_words[0].iter().filter(|&&s| s == 1).count() as f64;
        let sd = (nf * 0.7 * 0.3).sqrt();
        assert!((u_ones - 0.7 * nf).abs() < 3.0 * sd, "u frequency off: {u_ones}");

        // v given u: check P(v=0 | u=0) = 0.8.
        let (mut n_u0, mut n_v0_u0) = (0.0_f64, 0.0_f64);
        for j in 0..n {
            if cb.u_words[0][j] == 0 {
                n_u0 += 1.0;
                if cb.v_words[0][j] == 0 {
                    n_v0_u0 += 1.0;
                }
            }
        }
        let sd = (n_u0 * 0.8 * 0.2).sqrt();
        assert!((n_v0_u0 - 0.8 * n_u0).abs() < 3.0 * sd);

        // x given v: P(x=1 | v=1) = 0.75.
        let (mut n_v1, mut n_x1_v1) = (0.0_f64, 0.0_f64);
        for j in 0..n {
            if cb.v_words[0][j] == 1 {
                n_v1 += 1.0;
                if cb.x_words[0][j] == 1 {
                    n_x1_v1 += 1.0;
                }
            }
        }
        let sd = (n_v1 * 0.75 * 0.25).sqrt();
        assert!((n_x1_v1 - 0.75 * n_v1).abs() < 3.0 * sd);
    }

    #[test]
    fn seeded_codebooks_are_bit_reproducible() {
        let a = build_codebook(&uniform_identity_aux(), 50, 4, 3, 99).unwrap();
        let b = build_codebook(&uniform_identity_aux(), 50, 4, 3, 99).unwrap();
        assert_eq!(a.x_words, b.x_words);
        assert_eq!(a.v_words, b.v_words);
        assert_eq!(a.u_words, b.u_words);
        let c = build_codebook(&uniform_identity_aux(), 50, 4, 3, 100).unwrap();
        assert_ne!(a.x_words, c.x_words);
    }

    #[test]
    fn noiseless_transmission_reproduces_codeword() {
        let noiseless = bsc_pair(0.0, 0.0);
        let cb = build_codebook(&uniform_identity_aux(), 12, 2, 2, 5).unwrap();
        let (y, z) = transmit(&cb, 1, 0, &noiseless, 7).unwrap();
        assert_eq!(y, cb.x_words[cb.row(1, 0)]);
        assert_eq!(z, cb.x_words[cb.row(1, 0)]);
    }

    #[test]
    fn constant_eavesdropper_sees_constant() {
        let y = Channel::binary_symmetric("x", "y", 0.1).unwrap();
        let z = Channel::new(
            vec![Axis::bit("x")],
            vec![Axis::new("z", Alphabet::indexed(1).unwrap())],
            vec![vec![1.0], vec![1.0]],
        )
        .unwrap();
        let ch = Channel::conditionally_independent(&y, &z).unwrap();
        let cb = build_codebook(&uniform_identity_aux(), 20, 2, 1, 6).unwrap();
        let (_, zw) = transmit(&cb, 0, 0, &ch, 8).unwrap();
        assert!(zw.iter().all(|&s| s == 0));
    }

    #[test]
    fn transmission_flip_rates_match_channel() {
        let ch = bsc_pair(0.1, 0.2);
        let cb = build_codebook(&uniform_identity_aux(), 10_000, 1, 1, 1).unwrap();
        let (y, z) = transmit(&cb, 0, 0, &ch, 2).unwrap();
        let xw = &cb.x_words[0];
        let nf = 10_000.0;
        let y_flips = y.iter().zip(xw).filter(|(a, b)| a != b).count() as f64;
        let z_flips = z.iter().zip(xw).filter(|(a, b)| a != b).count() as f64;
        assert!((y_flips - 0.1 * nf).abs() < 3.0 * (nf * 0.1 * 0.9).sqrt());
        assert!((z_flips - 0.2 * nf).abs() < 3.0 * (nf * 0.2 * 0.8).sqrt());
    }

    #[test]
    fn out_of_range_message_rejected() {
        let cb = build_codebook(&uniform_identity_aux(), 4, 2, 2, 0).unwrap();
        assert!(matches!(
            transmit(&cb, 2, 0, &bsc_pair(0.1, 0.2), 0),
            Err(SimError::MessageRange { .. })
        ));
    }
}
