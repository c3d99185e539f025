use super::dist::Dist;
use super::{ProbError, Result};

/// A joint state that can report the entropy of any subset of its named
/// variables, in nats.
///
/// Classical joints report Shannon entropy; density matrices report von
/// Neumann entropy. Every derived information measure and every identity
/// check in this crate is written against this trait, which is what lets
/// the same identity suite run with H and with S.
pub trait EntropySource {
    /// Names of all variables carried by the state.
    fn variable_names(&self) -> Vec<String>;

    /// Entropy of the marginal on `vars` (the empty set has entropy 0).
    fn entropy_of(&self, vars: &[&str]) -> Result<f64>;
}

impl EntropySource for Dist {
    fn variable_names(&self) -> Vec<String> {
        self.axes().iter().map(|a| a.name.clone()).collect()
    }

    fn entropy_of(&self, vars: &[&str]) -> Result<f64> {
        Ok(self.marginal(vars)?.entropy())
    }
}

fn check_disjoint(sets: &[&[&str]]) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    for set in sets {
        for v in *set {
            if seen.contains(v) {
                return Err(ProbError::OverlappingVariables(v.to_string()));
            }
            seen.push(v);
        }
    }
    Ok(())
}

fn union<'a>(sets: &[&[&'a str]]) -> Vec<&'a str> {
    let mut out = Vec::new();
    for set in sets {
        out.extend_from_slice(set);
    }
    out
}

/// Marginal entropy H(vars); a thin alias over the trait for call-site
/// symmetry with the other measures.
pub fn entropy_of<S: EntropySource + ?Sized>(state: &S, vars: &[&str]) -> Result<f64> {
    state.entropy_of(vars)
}

/// H(a|b) = H(a,b) − H(b). May be negative for quantum states.
pub fn conditional_entropy<S: EntropySource + ?Sized>(
    state: &S,
    a: &[&str],
    b: &[&str],
) -> Result<f64> {
    check_disjoint(&[a, b])?;
    Ok(state.entropy_of(&union(&[a, b]))? - state.entropy_of(b)?)
}

/// H(a:b) = H(a) + H(b) − H(a,b).
pub fn mutual_information<S: EntropySource + ?Sized>(
    state: &S,
    a: &[&str],
    b: &[&str],
) -> Result<f64> {
    check_disjoint(&[a, b])?;
    Ok(state.entropy_of(a)? + state.entropy_of(b)? - state.entropy_of(&union(&[a, b]))?)
}

/// H(a:b|c) = H(a,c) + H(b,c) − H(a,b,c) − H(c).
pub fn conditional_mutual_information<S: EntropySource + ?Sized>(
    state: &S,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64> {
    check_disjoint(&[a, b, c])?;
    Ok(state.entropy_of(&union(&[a, c]))? + state.entropy_of(&union(&[b, c]))?
        - state.entropy_of(&union(&[a, b, c]))?
        - state.entropy_of(c)?)
}

fn check_blocks(y: &[&str], z: &[&str]) -> Result<usize> {
    if y.len() != z.len() {
        return Err(ProbError::MismatchedBlocks { y: y.len(), z: z.len() });
    }
    Ok(y.len())
}

/// Past-conditioned cross-block information sum
/// `sum_j H(y_j : z_{>j} | y_{<j}, cond)`.
///
/// The per-letter variables are passed in time order; `cond` is the
/// conditioning block (may be empty).
pub fn sigma_lt<S: EntropySource + ?Sized>(
    state: &S,
    y: &[&str],
    z: &[&str],
    cond: &[&str],
) -> Result<f64> {
    let n = check_blocks(y, z)?;
    let mut total = 0.0;
    for j in 0..n {
        let mut given: Vec<&str> = y[..j].to_vec();
        given.extend_from_slice(cond);
        total += conditional_mutual_information(state, &[y[j]], &z[j + 1..], &given)?;
    }
    Ok(total)
}

/// Future-conditioned mirror image: `sum_j H(z_j : y_{<j} | z_{>j}, cond)`.
/// Always equals [`sigma_lt`]; the identity suite checks the two routes
/// against each other.
pub fn sigma_gt<S: EntropySource + ?Sized>(
    state: &S,
    y: &[&str],
    z: &[&str],
    cond: &[&str],
) -> Result<f64> {
    let n = check_blocks(y, z)?;
    let mut total = 0.0;
    for j in 0..n {
        let mut given: Vec<&str> = z[j + 1..].to_vec();
        given.extend_from_slice(cond);
        total += conditional_mutual_information(state, &[z[j]], &y[..j], &given)?;
    }
    Ok(total)
}
