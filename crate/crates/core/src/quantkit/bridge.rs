use crate::probkit::{Axis, Dist, PType};

use super::density::DensityMatrix;
use super::{QuantError, Result};

/// `ln phi(r) = r ln r` with the removable singularity filled in:
/// `phi(0) = 1`, so the log is 0.
fn ln_phi(r: f64) -> f64 {
    if r > 0.0 {
        r * r.ln()
    } else {
        0.0
    }
}

fn check_shared_structure(rho: &DensityMatrix, p: &Dist) -> Result<()> {
    if rho.factors().len() != p.axes().len() {
        return Err(QuantError::FactorMismatch(format!(
            "{} factors vs {} axes",
            rho.factors().len(),
            p.axes().len()
        )));
    }
    for (f, a) in rho.factors().iter().zip(p.axes()) {
        if f.name != a.name || f.labels != a.labels {
            return Err(QuantError::FactorMismatch(a.name.clone()));
        }
    }
    Ok(())
}

/// Marginal of a flat joint vector onto the factor positions in `pos`.
fn marginalize(values: &[f64], sizes: &[usize], pos: &[usize]) -> Vec<f64> {
    let out_dim: usize = pos.iter().map(|&p| sizes[p]).product::<usize>().max(1);
    let mut out = vec![0.0; out_dim];
    let mut digits = vec![0usize; sizes.len()];
    for (idx, &v) in values.iter().enumerate() {
        let mut rem = idx;
        for i in (0..sizes.len()).rev() {
            digits[i] = rem % sizes[i];
            rem /= sizes[i];
        }
        let mut k = 0usize;
        for &p in pos {
            k = k * sizes[p] + digits[p];
        }
        out[k] += v;
    }
    out
}

struct MarginalPair {
    lam: Vec<f64>,
    prob: Vec<f64>,
    pos: Vec<usize>,
    label: &'static str,
}

impl MarginalPair {
    fn project(&self, digits: &[usize], sizes: &[usize]) -> usize {
        let mut k = 0usize;
        for &p in &self.pos {
            k = k * sizes[p] + digits[p];
        }
        k
    }
}

/// The eigenvalue bridge for conditional information densities.
///
/// Evaluates the type-weighted sum, over joint symbols with nonzero
/// empirical weight, of
///
/// ```text
///   ln phi(lam_xye)/P(x,y,e) + ln phi(lam_e)/P(e)
/// - ln phi(lam_xe)/P(x,e)    - ln phi(lam_ye)/P(y,e)
/// ```
///
/// with `phi(r) = r^r` and every `lam` a *marginal eigenvalue of the full
/// state* (the joint eigenvalue distribution summed down, never the
/// spectrum of a reduced matrix). For a diagonal state with `P` equal to
/// its diagonal this collapses to the classical expected conditional
/// information density of the type.
///
/// A zero probability at a symbol the type actually visits is reported
/// as an error, not patched.
pub fn bridge_cmi(
    rho: &DensityMatrix,
    p: &Dist,
    ptype: &PType,
    x: &[&str],
    y: &[&str],
    e: &[&str],
) -> Result<f64> {
    check_shared_structure(rho, p)?;
    let sizes: Vec<usize> = rho.factors().iter().map(Axis::size).collect();
    let dim: usize = sizes.iter().product::<usize>().max(1);
    if ptype.base().size() != dim {
        return Err(QuantError::TypeSizeMismatch { got: ptype.base().size(), expected: dim });
    }
    // x, y, e must partition the factors.
    let mut all = rho.factor_positions(&[x, y, e].concat())?;
    all.sort_unstable();
    if all.len() != rho.factors().len() {
        let missing = rho
            .factors()
            .iter()
            .enumerate()
            .find(|(i, _)| !all.contains(i))
            .map(|(_, f)| f.name.clone())
            .unwrap_or_default();
        return Err(QuantError::BadPartition(missing));
    }

    let lam = rho.eigensystem().marginal(
        &rho.factors().iter().map(|f| f.name.as_str()).collect::<Vec<_>>(),
    )?;
    let prob = p.weights().to_vec();

    let x_pos = rho.factor_positions(x)?;
    let y_pos = rho.factor_positions(y)?;
    let e_pos = rho.factor_positions(e)?;
    let xe_pos: Vec<usize> = x_pos.iter().chain(&e_pos).copied().collect();
    let ye_pos: Vec<usize> = y_pos.iter().chain(&e_pos).copied().collect();
    let all_pos: Vec<usize> = (0..sizes.len()).collect();

    let terms = [
        (
            MarginalPair {
                lam: lam.clone(),
                prob: prob.clone(),
                pos: all_pos,
                label: "joint",
            },
            1.0,
        ),
        (
            MarginalPair {
                lam: marginalize(&lam, &sizes, &e_pos),
                prob: marginalize(&prob, &sizes, &e_pos),
                pos: e_pos.clone(),
                label: "conditioning",
            },
            1.0,
        ),
        (
            MarginalPair {
                lam: marginalize(&lam, &sizes, &xe_pos),
                prob: marginalize(&prob, &sizes, &xe_pos),
                pos: xe_pos,
                label: "first+conditioning",
            },
            -1.0,
        ),
        (
            MarginalPair {
                lam: marginalize(&lam, &sizes, &ye_pos),
                prob: marginalize(&prob, &sizes, &ye_pos),
                pos: ye_pos,
                label: "second+conditioning",
            },
            -1.0,
        ),
    ];

    let freqs = ptype.freqs();
    let mut total = 0.0;
    let mut digits = vec![0usize; sizes.len()];
    for (idx, &w) in freqs.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut rem = idx;
        for i in (0..sizes.len()).rev() {
            digits[i] = rem % sizes[i];
            rem /= sizes[i];
        }
        let mut term = 0.0;
        for (m, sign) in &terms {
            let k = m.project(&digits, &sizes);
            if m.prob[k] <= 0.0 {
                return Err(QuantError::ZeroProbability {
                    symbol: symbol_label(rho.factors(), &digits),
                    marginal: m.label.to_string(),
                });
            }
            term += sign * ln_phi(m.lam[k]) / m.prob[k];
        }
        total += w * term;
    }
    Ok(total)
}

/// Unconditional variant: the conditioning block is empty, which kills
/// its term exactly (`lam` of the empty marginal is 1 and `ln phi(1) = 0`),
/// so this is [`bridge_cmi`] with no `e` factors.
pub fn bridge_mi(
    rho: &DensityMatrix,
    p: &Dist,
    ptype: &PType,
    x: &[&str],
    y: &[&str],
) -> Result<f64> {
    bridge_cmi(rho, p, ptype, x, y, &[])
}

fn symbol_label(factors: &[Axis], digits: &[usize]) -> String {
    let parts: Vec<String> = factors
        .iter()
        .zip(digits)
        .map(|(f, &d)| format!("{}={}", f.name, f.labels.label(d)))
        .collect();
    parts.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::{ptype_of_indices, Alphabet};
    use crate::testutil::{random_density, random_dist};
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn axes3() -> Vec<Axis> {
        vec![Axis::bit("x"), Axis::bit("y"), Axis::bit("e")]
    }

    fn joint_alphabet(axes: &[Axis]) -> Alphabet {
        let parts: Vec<&Alphabet> = axes.iter().map(|a| &a.labels).collect();
        Alphabet::product(&parts).unwrap()
    }

    /// Classical expected conditional information density of a type:
    /// sum of freq * ln [P(x,y,e) P(e) / (P(x,e) P(y,e))].
    fn classical_cmi_density(p: &Dist, ptype: &PType) -> f64 {
        let pe = p.marginal(&["e"]).unwrap();
        let pxe = p.marginal(&["x", "e"]).unwrap();
        let pye = p.marginal(&["y", "e"]).unwrap();
        let mut total = 0.0;
        for (idx, w) in ptype.freqs().iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let (x, rest) = (idx / 4, idx % 4);
            let (y, e) = (rest / 2, rest % 2);
            let val = (p.weights()[idx] * pe.weights()[e]
                / (pxe.weights()[x * 2 + e] * pye.weights()[y * 2 + e]))
                .ln();
            total += w * val;
        }
        total
    }

    #[test]
    fn diagonal_bridge_reduces_to_classical_density() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..10 {
            let p = random_dist(&mut rng, axes3());
            let rho = DensityMatrix::diagonal(axes3(), p.weights()).unwrap();
            let n = 6;
            let base = joint_alphabet(&axes3());
            let seq: Vec<usize> = (0..n).map(|_| rng.gen_range(0..8)).collect();
            let t = ptype_of_indices(&seq, &base).unwrap();
            let got = bridge_cmi(&rho, &p, &t, &["x"], &["y"], &["e"]).unwrap();
            let want = classical_cmi_density(&p, &t);
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn single_symbol_type_is_one_bracket_term() {
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        let p = random_dist(&mut rng, axes3());
        let rho = random_density(&mut rng, axes3(), 8);
        let base = joint_alphabet(&axes3());
        let t = ptype_of_indices(&[5], &base).unwrap();
        let got = bridge_cmi(&rho, &p, &t, &["x"], &["y"], &["e"]).unwrap();

        // Second, independently coded evaluation of the bracket at
        // symbol (x,y,e) = (1,0,1).
        let eig = rho.eigensystem();
        let lam = eig.marginal(&["x", "y", "e"]).unwrap();
        let lam_e = eig.marginal(&["e"]).unwrap();
        let lam_xe = eig.marginal(&["x", "e"]).unwrap();
        let lam_ye = eig.marginal(&["y", "e"]).unwrap();
        let lp = |r: f64| if r > 0.0 { r * r.ln() } else { 0.0 };
        let pw = p.weights();
        let p_e = p.marginal(&["e"]).unwrap();
        let p_xe = p.marginal(&["x", "e"]).unwrap();
        let p_ye = p.marginal(&["y", "e"]).unwrap();
        let want = lp(lam[5]) / pw[5] + lp(lam_e[1]) / p_e.weights()[1]
            - lp(lam_xe[3]) / p_xe.weights()[3]
            - lp(lam_ye[1]) / p_ye.weights()[1];
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn random_bridge_matches_reference_bracket() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..10 {
            let p = random_dist(&mut rng, axes3());
            let rho = random_density(&mut rng, axes3(), 8);
            let base = joint_alphabet(&axes3());
            let seq: Vec<usize> = (0..9).map(|_| rng.gen_range(0..8)).collect();
            let t = ptype_of_indices(&seq, &base).unwrap();
            let got = bridge_cmi(&rho, &p, &t, &["x"], &["y"], &["e"]).unwrap();

            // Reference: loop over the type symbols, recompute all four
            // marginals one digit triple at a time.
            let eig = rho.eigensystem();
            let lam = eig.marginal(&["x", "y", "e"]).unwrap();
            let lp = |r: f64| if r > 0.0 { r * r.ln() } else { 0.0 };
            let mut want = 0.0;
            for (idx, w) in t.freqs().iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                let (x, rest) = (idx / 4, idx % 4);
                let (y, e) = (rest / 2, rest % 2);
                let sum_over = |fx: Option<usize>, fy: Option<usize>| -> (f64, f64) {
                    let mut l = 0.0;
                    let mut q = 0.0;
                    for xx in 0..2 {
                        for yy in 0..2 {
                            if fx.map_or(false, |v| v != xx) || fy.map_or(false, |v| v != yy) {
                                continue;
                            }
                            let j = xx * 4 + yy * 2 + e;
                            l += lam[j];
                            q += p.weights()[j];
                        }
                    }
                    (l, q)
                };
                let (l_joint, q_joint) = (lam[idx], p.weights()[idx]);
                let (l_e, q_e) = sum_over(None, None);
                let (l_xe, q_xe) = sum_over(Some(x), None);
                let (l_ye, q_ye) = sum_over(None, Some(y));
                want += w
                    * (lp(l_joint) / q_joint + lp(l_e) / q_e
                        - lp(l_xe) / q_xe
                        - lp(l_ye) / q_ye);
            }
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn bridge_mi_is_cmi_with_empty_conditioning() {
        let mut rng = ChaCha12Rng::seed_from_u64(24);
        let axes = vec![Axis::bit("x"), Axis::bit("y")];
        let p = random_dist(&mut rng, axes.clone());
        let rho = random_density(&mut rng, axes.clone(), 4);
        let parts: Vec<&Alphabet> = axes.iter().map(|a| &a.labels).collect();
        let base = Alphabet::product(&parts).unwrap();
        let t = ptype_of_indices(&[0, 1, 2, 3, 1], &base).unwrap();
        let mi = bridge_mi(&rho, &p, &t, &["x"], &["y"]).unwrap();
        let cmi = bridge_cmi(&rho, &p, &t, &["x"], &["y"], &[]).unwrap();
        assert_eq!(mi, cmi);
    }

    #[test]
    fn zero_probability_at_visited_symbol_is_an_error() {
        let axes = vec![Axis::bit("x"), Axis::bit("y")];
        let p = Dist::new(axes.clone(), vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let rho = DensityMatrix::diagonal(axes.clone(), &[0.25, 0.25, 0.25, 0.25]).unwrap();
        let parts: Vec<&Alphabet> = axes.iter().map(|a| &a.labels).collect();
        let base = Alphabet::product(&parts).unwrap();
        let t = ptype_of_indices(&[3], &base).unwrap();
        let err = bridge_mi(&rho, &p, &t, &["x"], &["y"]).unwrap_err();
        assert!(matches!(err, QuantError::ZeroProbability { .. }), "{err}");
        // Unvisited zero symbols are fine.
        let t = ptype_of_indices(&[0, 1], &base).unwrap();
        assert!(bridge_mi(&rho, &p, &t, &["x"], &["y"]).is_ok());
    }
}
