use crate::probkit::Channel;

use super::codebook::Codebook;
use super::{Result, SimError, EQUIVOCATION_CAP};

/// Exact per-letter equivocation `H(s | z^n) / n` of a fixed codebook,
/// by full enumeration of the joint over `(s, z^n)` (the shared message
/// is summed out inside). The eavesdropper channel is the marginal of
/// the wiretap kernel onto its second output axis.
///
/// The result always lies in `[0, ln(n_s)/n]`: nonnegative, and at most
/// the full prior uncertainty of the secret message.
pub fn exact_equivocation(cb: &Codebook, channel: &Channel) -> Result<f64> {
    let z_name = channel.output_axes()[1].name.clone();
    let z_chan = channel.output_marginal(&[&z_name])?;
    let n_z = z_chan.output_size();
    let words: usize = n_z
        .checked_pow(cb.n as u32)
        .filter(|w| w.saturating_mul(cb.n_s * cb.n_t) <= EQUIVOCATION_CAP)
        .ok_or(SimError::EquivocationCap(usize::MAX))?;
    if words.saturating_mul(cb.n_s * cb.n_t) > EQUIVOCATION_CAP {
        return Err(SimError::EquivocationCap(words * cb.n_s * cb.n_t));
    }

    let prior = 1.0 / (cb.n_s * cb.n_t) as f64;
    let mut h_sz = 0.0; // H(S, Z^n)
    let mut h_z = 0.0; // H(Z^n)
    let mut digits = vec![0usize; cb.n];
    for w in 0..words {
        let mut rem = w;
        for j in (0..cb.n).rev() {
            digits[j] = rem % n_z;
            rem /= n_z;
        }
        let mut p_word = 0.0;
        for s in 0..cb.n_s {
            let mut p_s = 0.0;
            for t in 0..cb.n_t {
                let xw = &cb.x_words[cb.row(s, t)];
                let mut p = prior;
                for j in 0..cb.n {
                    p *= z_chan.row(xw[j])[digits[j]];
                    if p == 0.0 {
                        break;
                    }
                }
                p_s += p;
            }
            if p_s > 0.0 {
                h_sz -= p_s * p_s.ln();
            }
            p_word += p_s;
        }
        if p_word > 0.0 {
            h_z -= p_word * p_word.ln();
        }
    }
    Ok((h_sz - h_z) / cb.n as f64)
}
