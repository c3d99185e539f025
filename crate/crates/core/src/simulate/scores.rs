use crate::probkit::{Channel, Dist};
use crate::region::AuxiliaryModel;

use super::codebook::Codebook;
use super::{Result, SimError};

/// Pointwise information tables of the single-letter law
/// `P(u,v,x,y,z) = P(u) P(v|u) P(x|v) P(y,z|x)`, with log-values in
/// `[-inf, finite)`. Cells whose marginals vanish (so the density is
/// undefined) are stored as NaN and reported as errors if a score ever
/// touches them.
#[derive(Debug, Clone)]
pub struct SingleLetterLaw {
    /// `ln P(y : u)` indexed `[y][u]`.
    info_yu: Vec<Vec<f64>>,
    /// `ln P(y : v | u)` indexed `[y][v][u]`.
    info_yvu: Vec<Vec<Vec<f64>>>,
    info_zu: Vec<Vec<f64>>,
    info_zvu: Vec<Vec<Vec<f64>>>,
}

fn ln_ratio(joint: f64, denom: f64) -> f64 {
    if denom <= 0.0 {
        f64::NAN
    } else if joint <= 0.0 {
        f64::NEG_INFINITY
    } else {
        (joint / denom).ln()
    }
}

impl SingleLetterLaw {
    pub fn new(aux: &AuxiliaryModel, channel: &Channel) -> Result<Self> {
        let joint = aux.induced_joint(channel).map_err(SimError::Region)?;
        let y_name = channel.output_axes()[0].name.clone();
        let z_name = channel.output_axes()[1].name.clone();
        let v = aux.v_name().to_string();
        let u = aux.u_name().to_string();
        let n_u = aux.n_u();
        let n_v = aux.n_v();
        let n_y = channel.output_axes()[0].size();
        let n_z = channel.output_axes()[1].size();

        let build_pair = |out: &str, n_out: usize| -> Result<(Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>)> {
            let p_ou = joint.marginal(&[out, &u])?;
            let p_o = joint.marginal(&[out])?;
            let p_u = joint.marginal(&[&u])?;
            let p_ovu = joint.marginal(&[out, &v, &u])?;
            let p_vu = joint.marginal(&[&v, &u])?;
            let mut t1 = vec![vec![0.0; n_u]; n_out];
            let mut t2 = vec![vec![vec![0.0; n_u]; n_v]; n_out];
            for o in 0..n_out {
                for uu in 0..n_u {
                    t1[o][uu] = ln_ratio(
                        p_ou.weight_at(&[o, uu]),
                        p_o.weight_at(&[o]) * p_u.weight_at(&[uu]),
                    );
                    for vv in 0..n_v {
                        // ln P(o,v|u) - ln P(o|u) - ln P(v|u); the 1/P(u)
                        // factors cancel pairwise.
                        t2[o][vv][uu] = ln_ratio(
                            p_ovu.weight_at(&[o, vv, uu]) * p_u.weight_at(&[uu]),
                            p_ou.weight_at(&[o, uu]) * p_vu.weight_at(&[vv, uu]),
                        );
                    }
                }
            }
            Ok((t1, t2))
        };
        let (info_yu, info_yvu) = build_pair(&y_name, n_y)?;
        let (info_zu, info_zvu) = build_pair(&z_name, n_z)?;
        Ok(Self { info_yu, info_yvu, info_zu, info_zvu })
    }

    fn cell(&self, value: f64, role: &'static str, letter: usize, symbol: String) -> Result<f64> {
        if value.is_nan() {
            return Err(SimError::ZeroProbability { role, letter, symbol });
        }
        Ok(value)
    }

    /// `(1/n) sum_j ln P(y_j : u_j)` for a received word against a `u`
    /// word; `-inf` when any letter has zero joint probability.
    pub fn score_yu(&self, y: &[usize], u_word: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for (j, (&yy, &uu)) in y.iter().zip(u_word).enumerate() {
            total += self.cell(self.info_yu[yy][uu], "y:u", j, format!("(y={yy},u={uu})"))?;
        }
        Ok(total / y.len() as f64)
    }

    pub fn score_yvu(&self, y: &[usize], v_word: &[usize], u_word: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for (j, ((&yy, &vv), &uu)) in y.iter().zip(v_word).zip(u_word).enumerate() {
            total +=
                self.cell(self.info_yvu[yy][vv][uu], "y:v|u", j, format!("(y={yy},v={vv},u={uu})"))?;
        }
        Ok(total / y.len() as f64)
    }

    pub fn score_zu(&self, z: &[usize], u_word: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for (j, (&zz, &uu)) in z.iter().zip(u_word).enumerate() {
            total += self.cell(self.info_zu[zz][uu], "z:u", j, format!("(z={zz},u={uu})"))?;
        }
        Ok(total / z.len() as f64)
    }

    pub fn score_zvu(&self, z: &[usize], v_word: &[usize], u_word: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for (j, ((&zz, &vv), &uu)) in z.iter().zip(v_word).zip(u_word).enumerate() {
            total +=
                self.cell(self.info_zvu[zz][vv][uu], "z:v|u", j, format!("(z={zz},v={vv},u={uu})"))?;
        }
        Ok(total / z.len() as f64)
    }

    /// The underlying single-letter joint, for tests.
    pub fn joint(aux: &AuxiliaryModel, channel: &Channel) -> Result<Dist> {
        Ok(aux.induced_joint(channel).map_err(SimError::Region)?)
    }
}

/// Per-hypothesis base scores, all `(1/n)`-normalized log information
/// densities evaluated at the hypothesis' codewords.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisScores {
    pub g1y: f64,
    pub g1z: f64,
    pub g2y: f64,
    pub g2z: f64,
}

fn inf_sum(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        a + b
    }
}

fn inf_diff(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if b == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        a - b
    }
}

impl HypothesisScores {
    /// The five composite scores: the equivocation difference, the two
    /// sum-rate forms, and the two shared-message forms.
    pub fn composite(&self) -> [f64; 5] {
        [
            inf_diff(self.g2y, self.g2z),
            inf_sum(self.g2y, self.g1y),
            inf_sum(self.g2y, self.g1z),
            self.g1y,
            self.g1z,
        ]
    }
}

/// Base scores of the full hypothesis `(s, t_y, t_z)` against an
/// observation, using the codebook's generator law.
pub fn hypothesis_scores(
    law: &SingleLetterLaw,
    y: &[usize],
    z: &[usize],
    cb: &Codebook,
    hyp: (usize, usize, usize),
) -> Result<HypothesisScores> {
    let (s, t_y, t_z) = hyp;
    cb.check_message(s, t_y)?;
    cb.check_message(s, t_z)?;
    let u_y = &cb.u_words[t_y];
    let u_z = &cb.u_words[t_z];
    Ok(HypothesisScores {
        g1y: law.score_yu(y, u_y)?,
        g1z: law.score_zu(z, u_z)?,
        g2y: law.score_yvu(y, &cb.v_words[cb.row(s, t_y)], u_y)?,
        g2z: law.score_zvu(z, &cb.v_words[cb.row(s, t_z)], u_z)?,
    })
}

/// The five pairwise ratio scores of a candidate against a reference
/// hypothesis placed in the denominator ("evaluated as the true
/// hypothesis"), plus both sides' base scores.
///
/// Infinity rules: a `-inf` on the candidate side pins the ratio at
/// `-inf` (the candidate cannot explain the observation); otherwise a
/// `-inf` on the reference side pushes it to `+inf`.
#[derive(Debug, Clone)]
pub struct GammaScores {
    pub candidate: HypothesisScores,
    pub reference: HypothesisScores,
    /// Base-score ratios, `candidate - reference` under the infinity
    /// rules: `g1y, g1z, g2y, g2z`.
    pub base_ratios: [f64; 4],
    /// The five composite ratio scores.
    pub gamma: [f64; 5],
}

fn ratio(c: f64, r: f64) -> f64 {
    if c == f64::INFINITY {
        f64::INFINITY
    } else if c == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if r == f64::NEG_INFINITY {
        f64::INFINITY
    } else if r == f64::INFINITY {
        f64::NEG_INFINITY
    } else {
        c - r
    }
}

pub fn gamma_scores(
    law: &SingleLetterLaw,
    y: &[usize],
    z: &[usize],
    cb: &Codebook,
    candidate: (usize, usize, usize),
    reference: (usize, usize, usize),
) -> Result<GammaScores> {
    let c = hypothesis_scores(law, y, z, cb, candidate)?;
    let r = hypothesis_scores(law, y, z, cb, reference)?;
    let cc = c.composite();
    let rc = r.composite();
    Ok(GammaScores {
        candidate: c,
        reference: r,
        base_ratios: [
            ratio(c.g1y, r.g1y),
            ratio(c.g1z, r.g1z),
            ratio(c.g2y, r.g2y),
            ratio(c.g2z, r.g2z),
        ],
        gamma: [
            ratio(cc[0], rc[0]),
            ratio(cc[1], rc[1]),
            ratio(cc[2], rc[2]),
            ratio(cc[3], rc[3]),
            ratio(cc[4], rc[4]),
        ],
    })
}
