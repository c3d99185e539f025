use crate::probkit::{
    conditional_entropy, conditional_mutual_information as cmi, mutual_information as mi,
    sigma_gt, sigma_lt, EntropySource,
};

use super::model::WiretapModel;
use super::{entropy, IdentityError, IdentityReport, Result, EQUALITY_TOL, SLACK_TOL};

fn join<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

/// Conditioning on two parents yields net nonnegative entropy:
/// `S(a|x) + S(a|y) >= 0`. Each summand alone can be negative for
/// entangled states; classically both are nonnegative and the claim is
/// trivial.
pub fn check_two_parents<S: EntropySource + ?Sized>(
    state: &S,
    a: &[&str],
    x: &[&str],
    y: &[&str],
) -> Result<IdentityReport> {
    let slack = conditional_entropy(state, a, x)? + conditional_entropy(state, a, y)?;
    Ok(IdentityReport::at_least("two_parents", slack, 0.0, SLACK_TOL))
}

/// Swapping which variable is conditioned on:
/// `H(x:b) - H(x:a) = H(x:b|a) - H(x:a|b)`.
pub fn check_mi_swap<S: EntropySource + ?Sized>(
    state: &S,
    x: &[&str],
    a: &[&str],
    b: &[&str],
) -> Result<IdentityReport> {
    let lhs = mi(state, x, b)? - mi(state, x, a)?;
    let rhs = cmi(state, x, b, a)? - cmi(state, x, a, b)?;
    Ok(IdentityReport::equality("mi_swap", lhs, rhs, EQUALITY_TOL))
}

/// The past-conditioned and future-conditioned cross-block sums agree:
/// `sum_j H(y_j:z_{>j}|y_{<j},cond) = sum_j H(z_j:y_{<j}|z_{>j},cond)`.
pub fn check_sigma_equality<S: EntropySource + ?Sized>(
    state: &S,
    y: &[&str],
    z: &[&str],
    cond: &[&str],
) -> Result<IdentityReport> {
    let lhs = sigma_lt(state, y, z, cond)?;
    let rhs = sigma_gt(state, y, z, cond)?;
    let tol = EQUALITY_TOL * y.len() as f64;
    let name = if cond.is_empty() {
        "sigma_lt_eq_gt".to_string()
    } else {
        format!("sigma_lt_eq_gt[{}]", cond.join(","))
    };
    Ok(IdentityReport::equality(name, lhs, rhs, tol))
}

/// Block mutual information against the shared message decomposes into
/// per-letter informations through the mixed window:
///
/// ```text
/// H(y^n:t) = sum_j H(y_j : alpha_j, t) - sum_j H(y_j : y_{<j}) - Sigma_<(t)
/// H(z^n:t) = sum_j H(z_j : alpha_j, t) - sum_j H(z_j : z_{>j}) - Sigma_>(t)
/// ```
pub fn check_block_mi_decomposition(m: &WiretapModel) -> Result<Vec<IdentityReport>> {
    let state = m.state();
    let (y, z, t) = (m.y_block(), m.z_block(), [m.shared()]);
    let n = m.n();
    let tol = EQUALITY_TOL * n as f64;

    let lhs_y = mi(state, &y, &t)?;
    let mut rhs_y = -sigma_lt(state, &y, &z, &t)?;
    for j in 0..n {
        rhs_y += mi(state, &[y[j]], &join(&m.alpha(j), &t))?;
        rhs_y -= mi(state, &[y[j]], &y[..j])?;
    }

    let lhs_z = mi(state, &z, &t)?;
    let mut rhs_z = -sigma_gt(state, &y, &z, &t)?;
    for j in 0..n {
        rhs_z += mi(state, &[z[j]], &join(&m.alpha(j), &t))?;
        rhs_z -= mi(state, &[z[j]], &z[j + 1..])?;
    }

    Ok(vec![
        IdentityReport::equality("block_mi[y]", lhs_y, rhs_y, tol),
        IdentityReport::equality("block_mi[z]", lhs_z, rhs_z, tol),
    ])
}

/// Conditional variant, splitting off the secret message:
///
/// ```text
/// H(y^n:s|t) = sum_j H(y_j:s|alpha_j,t) + Sigma_<(t) - Sigma_<(s,t)
/// H(z^n:s|t) = sum_j H(z_j:s|alpha_j,t) + Sigma_>(t) - Sigma_>(s,t)
/// ```
pub fn check_block_cmi_decomposition(m: &WiretapModel) -> Result<Vec<IdentityReport>> {
    let state = m.state();
    let (y, z) = (m.y_block(), m.z_block());
    let s = [m.secret()];
    let t = [m.shared()];
    let st = [m.secret(), m.shared()];
    let n = m.n();
    let tol = EQUALITY_TOL * n as f64;

    let lhs_y = cmi(state, &y, &s, &t)?;
    let mut rhs_y = sigma_lt(state, &y, &z, &t)? - sigma_lt(state, &y, &z, &st)?;
    for j in 0..n {
        rhs_y += cmi(state, &[y[j]], &s, &join(&m.alpha(j), &t))?;
    }

    let lhs_z = cmi(state, &z, &s, &t)?;
    let mut rhs_z = sigma_gt(state, &y, &z, &t)? - sigma_gt(state, &y, &z, &st)?;
    for j in 0..n {
        rhs_z += cmi(state, &[z[j]], &s, &join(&m.alpha(j), &t))?;
    }

    Ok(vec![
        IdentityReport::equality("block_cmi[y]", lhs_y, rhs_y, tol),
        IdentityReport::equality("block_cmi[z]", lhs_z, rhs_z, tol),
    ])
}

/// The receiver/eavesdropper difference collapses to single-letter
/// terms — the extreme chain-ruling identity:
///
/// ```text
/// H(y^n:s|t) - H(z^n:s|t)
///   = sum_j H(y_j:s|alpha_j,t) - sum_j H(z_j:s|alpha_j,t)
/// ```
pub fn check_cross_block_difference(m: &WiretapModel) -> Result<IdentityReport> {
    let state = m.state();
    let (y, z) = (m.y_block(), m.z_block());
    let s = [m.secret()];
    let t = [m.shared()];
    let n = m.n();
    let tol = EQUALITY_TOL * n as f64;

    let lhs = cmi(state, &y, &s, &t)? - cmi(state, &z, &s, &t)?;
    let mut rhs = 0.0;
    for j in 0..n {
        let given = join(&m.alpha(j), &t);
        rhs += cmi(state, &[y[j]], &s, &given)?;
        rhs -= cmi(state, &[z[j]], &s, &given)?;
    }
    Ok(IdentityReport::equality("cross_block_diff", lhs, rhs, tol))
}

struct Deltas {
    dy: f64,
    dty: f64,
    dtz: f64,
}

fn deltas(m: &WiretapModel) -> Result<Deltas> {
    let state = m.state();
    let (y, z) = (m.y_block(), m.z_block());
    Ok(Deltas {
        dy: conditional_entropy(state, &[m.secret(), m.shared()], &y)?,
        dty: conditional_entropy(state, &[m.shared()], &y)?,
        dtz: conditional_entropy(state, &[m.shared()], &z)?,
    })
}

/// The decoder-residual bookkeeping identities, with
/// `n d_y = H(s,t|y^n)`, `n d_ty = H(t|y^n)`, `n d_tz = H(t|z^n)`:
///
/// ```text
/// H(s|z^n) = H(y^n:s|t) - H(z^n:s|t) - H(t|z^n,s) + n(d_tz + d_y - d_ty)
/// H(s|t)   = H(y^n:s|t) + n(d_y - d_ty)
/// H(t)     = H(y^n:t) + n d_ty
/// H(t)     = H(z^n:t) + n d_tz
/// ```
///
/// (The `n d` quantities here are the products themselves; no division
/// by `n` ever happens, so nothing is lost at finite `n`.)
pub fn check_delta_identities(m: &WiretapModel) -> Result<Vec<IdentityReport>> {
    let state = m.state();
    let (y, z) = (m.y_block(), m.z_block());
    let s = [m.secret()];
    let t = [m.shared()];
    let tol = EQUALITY_TOL * m.n() as f64;
    let d = deltas(m)?;

    let h_s_zn = conditional_entropy(state, &s, &z)?;
    let h_s_t = conditional_entropy(state, &s, &t)?;
    let h_t = entropy(state, &t)?;
    let i_y_s_t = cmi(state, &y, &s, &t)?;
    let i_z_s_t = cmi(state, &z, &s, &t)?;
    let h_t_zn_s = conditional_entropy(state, &t, &join(&z, &s))?;

    Ok(vec![
        IdentityReport::equality(
            "delta[s_given_zn]",
            h_s_zn,
            i_y_s_t - i_z_s_t - h_t_zn_s + d.dtz + d.dy - d.dty,
            tol,
        ),
        IdentityReport::equality("delta[s_given_t]", h_s_t, i_y_s_t + d.dy - d.dty, tol),
        IdentityReport::equality("delta[t_via_y]", h_t, mi(state, &y, &t)? + d.dty, tol),
        IdentityReport::equality("delta[t_via_z]", h_t, mi(state, &z, &t)? + d.dtz, tol),
    ])
}

/// The four rate-shaped identities the converse argument reads off
/// (every term exact at finite `n`; the asymptotic argument then drops
/// the deltas):
///
/// ```text
/// H(s|z^n) = sum_j H(y_j:s|a_j,t) - sum_j H(z_j:s|a_j,t)
///            - H(t|z^n,s) + n(d_tz + d_y - d_ty)
/// H(s|t)   = sum_j H(y_j:s|a_j,t) + Sigma_<(t) - Sigma_<(s,t) + n(d_y - d_ty)
/// H(t)     = sum_j H(y_j:a_j,t) - sum_j H(y_j:y_{<j}) - Sigma_<(t) + n d_ty
/// H(t)     = sum_j H(z_j:a_j,t) - sum_j H(z_j:z_{>j}) - Sigma_<(t) + n d_tz
/// ```
pub fn check_rate_identities(m: &WiretapModel) -> Result<Vec<IdentityReport>> {
    let state = m.state();
    let (y, z) = (m.y_block(), m.z_block());
    let s = [m.secret()];
    let t = [m.shared()];
    let st = [m.secret(), m.shared()];
    let n = m.n();
    let tol = EQUALITY_TOL * n as f64;
    let d = deltas(m)?;

    let sig_t = sigma_lt(state, &y, &z, &t)?;
    let sig_st = sigma_lt(state, &y, &z, &st)?;

    let mut sum_y_cmi = 0.0;
    let mut sum_z_cmi = 0.0;
    let mut sum_y_mi = 0.0;
    let mut sum_z_mi = 0.0;
    let mut sum_y_past = 0.0;
    let mut sum_z_future = 0.0;
    for j in 0..n {
        let given = join(&m.alpha(j), &t);
        sum_y_cmi += cmi(state, &[y[j]], &s, &given)?;
        sum_z_cmi += cmi(state, &[z[j]], &s, &given)?;
        sum_y_mi += mi(state, &[y[j]], &join(&m.alpha(j), &t))?;
        sum_z_mi += mi(state, &[z[j]], &join(&m.alpha(j), &t))?;
        sum_y_past += mi(state, &[y[j]], &y[..j])?;
        sum_z_future += mi(state, &[z[j]], &z[j + 1..])?;
    }

    let h_s_zn = conditional_entropy(state, &s, &z)?;
    let h_s_t = conditional_entropy(state, &s, &t)?;
    let h_t = entropy(state, &t)?;
    let h_t_zn_s = conditional_entropy(state, &t, &join(&z, &s))?;

    Ok(vec![
        IdentityReport::equality(
            "rate[re]",
            h_s_zn,
            sum_y_cmi - sum_z_cmi - h_t_zn_s + d.dtz + d.dy - d.dty,
            tol,
        ),
        IdentityReport::equality(
            "rate[rs]",
            h_s_t,
            sum_y_cmi + sig_t - sig_st + d.dy - d.dty,
            tol,
        ),
        IdentityReport::equality("rate[ty]", h_t, sum_y_mi - sum_y_past - sig_t + d.dty, tol),
        IdentityReport::equality("rate[tz]", h_t, sum_z_mi - sum_z_future - sig_t + d.dtz, tol),
    ])
}

/// When one side of a mutual information carries a clone of `j`,
/// conditioning on `j` can only shrink it:
/// `H(a : (b,j) | j) <= H(a : (b,j))`. In the quantum case this needs
/// `j` to be a classical (block-diagonal) variable; callers are
/// responsible for feeding such states.
pub fn check_cmi_le_mi<S: EntropySource + ?Sized>(
    state: &S,
    a: &[&str],
    beta: &[&str],
    j: &[&str],
) -> Result<IdentityReport> {
    let b = join(beta, j);
    let with = mi(state, a, &b)?;
    // Conditioned side: H(a : (beta,j) | j) = H(a : beta | j), since the
    // cloned j component is fixed by the conditioning.
    let conditioned = cmi(state, a, beta, j)?;
    Ok(IdentityReport::at_least("cmi_le_mi", with - conditioned, 0.0, SLACK_TOL))
}

/// For a chain whose middle variable separates the ends
/// (`H(a:b|e) = 0`), the conditional information is a plain difference:
/// `H(a:e|b) = H(a:e) - H(a:b)`. Inputs that are not Markov are
/// rejected, with the offending conditional information reported.
pub fn check_markov_mi_difference<S: EntropySource + ?Sized>(
    state: &S,
    a: &[&str],
    e: &[&str],
    b: &[&str],
) -> Result<IdentityReport> {
    let precondition = cmi(state, a, b, e)?;
    if precondition.abs() > SLACK_TOL {
        return Err(IdentityError::MarkovPrecondition { cmi: precondition, tol: SLACK_TOL });
    }
    let lhs = cmi(state, a, e, b)?;
    let rhs = mi(state, a, e)? - mi(state, a, b)?;
    Ok(IdentityReport::equality("markov_mi_diff", lhs, rhs, EQUALITY_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identities::{ModelState, WiretapModel};
    use crate::probkit::{joint_from_factors, Axis, Channel, Dist};
    use crate::quantkit::DensityMatrix;
    use crate::testutil::{random_density, random_dist};
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn two_parents_classical_and_boundary() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let d = random_dist(&mut rng, vec![Axis::bit("a"), Axis::bit("x"), Axis::bit("y")]);
        let r = check_two_parents(&d, &["a"], &["x"], &["y"]).unwrap();
        assert!(r.passed);
        assert!(r.lhs >= 0.0);

        // Maximally entangled (a,x) with a pure spectator y: the slack
        // is exactly -ln2 + ln2 = 0.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        amps[0] = Complex64::new(h, 0.0); // |a=0,x=0,y=0>
        amps[6] = Complex64::new(h, 0.0); // |a=1,x=1,y=0>
        let rho =
            DensityMatrix::pure(vec![Axis::bit("a"), Axis::bit("x"), Axis::bit("y")], &amps)
                .unwrap();
        let r = check_two_parents(&rho, &["a"], &["x"], &["y"]).unwrap();
        assert!(r.lhs.abs() < 1e-9, "boundary slack {}", r.lhs);
        assert!(r.passed);
    }

    #[test]
    fn two_parents_random_quantum_sweep() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..50 {
            let rho = random_density(
                &mut rng,
                vec![Axis::bit("a"), Axis::bit("x"), Axis::bit("y")],
                8,
            );
            let r = check_two_parents(&rho, &["a"], &["x"], &["y"]).unwrap();
            assert!(r.passed, "slack {}", r.lhs);
        }
    }

    #[test]
    fn mi_swap_holds_classical_and_quantum() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        for _ in 0..20 {
            let d = random_dist(&mut rng, vec![Axis::bit("x"), Axis::bit("a"), Axis::bit("b")]);
            assert!(check_mi_swap(&d, &["x"], &["a"], &["b"]).unwrap().passed);
            let rho = random_density(
                &mut rng,
                vec![Axis::bit("x"), Axis::bit("a"), Axis::bit("b")],
                8,
            );
            let r = check_mi_swap(&rho, &["x"], &["a"], &["b"]).unwrap();
            assert!(r.passed, "quantum residual {}", r.residual);
        }
    }

    #[test]
    fn mi_swap_rejects_overlapping_blocks() {
        let d = Dist::uniform(vec![Axis::bit("x"), Axis::bit("a")]).unwrap();
        assert!(check_mi_swap(&d, &["x"], &["a"], &["a"]).is_err());
    }

    #[test]
    fn markov_difference_and_error_path() {
        // a <- e <- b built as b -> e -> a.
        let b = Dist::uniform(vec![Axis::bit("b")]).unwrap();
        let be = Channel::binary_symmetric("b", "e", 0.25).unwrap();
        let ea = Channel::binary_symmetric("e", "a", 0.15).unwrap();
        let d = joint_from_factors(&[b.into(), be.into(), ea.into()]).unwrap();
        let r = check_markov_mi_difference(&d, &["a"], &["e"], &["b"]).unwrap();
        assert!(r.passed, "residual {}", r.residual);

        // e = b copy: H(a:e|b) = 0 and H(a:e) = H(a:b), residual 0.
        let b = Dist::uniform(vec![Axis::bit("b")]).unwrap();
        let be = Channel::binary_symmetric("b", "e", 0.0).unwrap();
        let ea = Channel::binary_symmetric("e", "a", 0.2).unwrap();
        let d = joint_from_factors(&[b.into(), be.into(), ea.into()]).unwrap();
        let r = check_markov_mi_difference(&d, &["a"], &["e"], &["b"]).unwrap();
        assert!(r.passed && r.residual < 1e-12);

        // Non-Markov input is refused with the offending CMI.
        let mut rng = ChaCha12Rng::seed_from_u64(44);
        let d = random_dist(&mut rng, vec![Axis::bit("a"), Axis::bit("e"), Axis::bit("b")]);
        assert!(matches!(
            check_markov_mi_difference(&d, &["a"], &["e"], &["b"]),
            Err(IdentityError::MarkovPrecondition { .. })
        ));
    }

    #[test]
    fn cmi_le_mi_classical_and_constant_j() {
        let mut rng = ChaCha12Rng::seed_from_u64(45);
        for _ in 0..20 {
            let d = random_dist(&mut rng, vec![Axis::bit("a"), Axis::bit("beta"), Axis::bit("j")]);
            assert!(check_cmi_le_mi(&d, &["a"], &["beta"], &["j"]).unwrap().passed);
        }
        // Constant j: conditioning changes nothing, slack is 0.
        let mut w = vec![0.0; 8];
        let base = random_dist(&mut rng, vec![Axis::bit("a"), Axis::bit("beta")]);
        for a in 0..2 {
            for be in 0..2 {
                w[a * 4 + be * 2] = base.weights()[a * 2 + be];
            }
        }
        let d = Dist::new(vec![Axis::bit("a"), Axis::bit("beta"), Axis::bit("j")], w).unwrap();
        let r = check_cmi_le_mi(&d, &["a"], &["beta"], &["j"]).unwrap();
        assert!(r.lhs.abs() < 1e-12);
    }

    #[test]
    fn cmi_le_mi_quantum_classical_in_j() {
        // Block-diagonal in j: a random two-qubit state tensored against
        // each j value with classical mixing.
        let mut rng = ChaCha12Rng::seed_from_u64(46);
        for _ in 0..10 {
            let r0 = random_density(&mut rng, vec![Axis::bit("a"), Axis::bit("beta")], 4);
            let r1 = random_density(&mut rng, vec![Axis::bit("a"), Axis::bit("beta")], 4);
            let w: f64 = rng.gen_range(0.2..0.8);
            // Factors ordered (a, beta, j): j is the least significant
            // index, so the block structure interleaves.
            let mut m = nalgebra::DMatrix::<Complex64>::zeros(8, 8);
            for i in 0..4 {
                for k in 0..4 {
                    let (ia, ib) = (i / 2, i % 2);
                    let (ka, kb) = (k / 2, k % 2);
                    let row0 = ia * 4 + ib * 2;
                    let col0 = ka * 4 + kb * 2;
                    m[(row0, col0)] = r0.entries()[(i, k)] * Complex64::new(w, 0.0);
                    m[(row0 + 1, col0 + 1)] = r1.entries()[(i, k)] * Complex64::new(1.0 - w, 0.0);
                }
            }
            let rho = DensityMatrix::new(
                vec![Axis::bit("a"), Axis::bit("beta"), Axis::bit("j")],
                m,
            )
            .unwrap();
            let r = check_cmi_le_mi(&rho, &["a"], &["beta"], &["j"]).unwrap();
            assert!(r.passed, "slack {}", r.lhs);
        }
    }

    fn tiny_model(seed: u64, n: usize) -> WiretapModel {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut axes = vec![Axis::bit("s"), Axis::bit("t")];
        for j in 1..=n {
            axes.push(Axis::bit(format!("y{j}")));
        }
        for j in 1..=n {
            axes.push(Axis::bit(format!("z{j}")));
        }
        let d = random_dist(&mut rng, axes);
        WiretapModel::new(
            ModelState::Classical(d),
            "s",
            "t",
            (1..=n).map(|j| format!("y{j}")).collect(),
            (1..=n).map(|j| format!("z{j}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn n_equals_one_identities_reduce_to_plain_chain_rules() {
        let m = tiny_model(47, 1);
        for r in check_block_mi_decomposition(&m)
            .unwrap()
            .into_iter()
            .chain(check_block_cmi_decomposition(&m).unwrap())
            .chain(check_delta_identities(&m).unwrap())
            .chain(check_rate_identities(&m).unwrap())
        {
            assert!(r.residual < 1e-12, "{}: residual {}", r.name, r.residual);
        }
    }

    #[test]
    fn deterministic_noiseless_model_zero_deltas() {
        // Deterministic encoder, noiseless channel, n = 2: the decoder
        // residuals vanish and H(s|z^n) equals the exact difference
        // formula term by term.
        let n = 2;
        let s = Dist::uniform(vec![Axis::bit("s")]).unwrap();
        let t = Dist::uniform(vec![Axis::bit("t")]).unwrap();
        let mut factors: Vec<crate::probkit::Factor> = vec![s.into(), t.into()];
        // y_j = z_j = x_j(s,t) with x_1 = s, x_2 = s xor t.
        for j in 1..=n {
            let tag = move |s: usize, t: usize| if j == 1 { s } else { s ^ t };
            factors.push(
                Channel::deterministic(
                    vec![Axis::bit("s"), Axis::bit("t")],
                    vec![Axis::bit(format!("y{j}")), Axis::bit(format!("z{j}"))],
                    move |cfg| {
                        let (sv, tv) = (cfg / 2, cfg % 2);
                        let x = tag(sv, tv);
                        vec![x, x]
                    },
                )
                .unwrap()
                .into(),
            );
        }
        let d = joint_from_factors(&factors).unwrap();
        let m = WiretapModel::new(
            ModelState::Classical(d.clone()),
            "s",
            "t",
            vec!["y1".into(), "y2".into()],
            vec!["z1".into(), "z2".into()],
        )
        .unwrap();

        let dy = conditional_entropy(&d, &["s", "t"], &["y1", "y2"]).unwrap();
        let dty = conditional_entropy(&d, &["t"], &["y1", "y2"]).unwrap();
        let dtz = conditional_entropy(&d, &["t"], &["z1", "z2"]).unwrap();
        assert!(dy.abs() < 1e-12 && dty.abs() < 1e-12 && dtz.abs() < 1e-12);

        let h_s_zn = conditional_entropy(&d, &["s"], &["z1", "z2"]).unwrap();
        let want = cmi(&d, &["y1", "y2"], &["s"], &["t"]).unwrap()
            - cmi(&d, &["z1", "z2"], &["s"], &["t"]).unwrap()
            - conditional_entropy(&d, &["t"], &["z1", "z2", "s"]).unwrap();
        assert!((h_s_zn - want).abs() < 1e-12);

        for r in check_rate_identities(&m).unwrap() {
            assert!(r.passed, "{}: residual {}", r.name, r.residual);
        }
    }

    #[test]
    fn random_models_n3_all_identities() {
        for seed in 48..52 {
            let m = tiny_model(seed, 3);
            let mut all = vec![check_cross_block_difference(&m).unwrap()];
            all.extend(check_block_mi_decomposition(&m).unwrap());
            all.extend(check_block_cmi_decomposition(&m).unwrap());
            all.extend(check_delta_identities(&m).unwrap());
            all.extend(check_rate_identities(&m).unwrap());
            for r in &all {
                assert!(r.residual < 1e-9 * 3.0, "{}: residual {}", r.name, r.residual);
            }
        }
    }
}
