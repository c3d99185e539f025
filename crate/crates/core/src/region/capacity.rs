use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::probkit::{Alphabet, Axis, Channel, Dist};
use crate::seeding::derive_seed;

use super::constraints::{constraints_classical, AuxiliaryModel};
use super::{RegionError, Result};

/// Multi-start optimizer settings. The objective is non-concave in the
/// auxiliaries, so restarts are the honesty signal: a tight spread of
/// restart values is evidence the search is not stuck.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub gradient_step: f64,
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 0,
            max_iterations: 300,
            gradient_step: 1e-5,
            tolerance: 1e-10,
        }
    }
}

/// Best value found, the model achieving it, and every restart's final
/// value for convergence diagnosis.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub value: f64,
    pub argmax: AuxiliaryModel,
    pub restart_values: Vec<f64>,
}

fn softmax_into(params: &[f64], out: &mut [f64]) {
    let m = params.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, p) in out.iter_mut().zip(params) {
        *o = (p - m).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Simplex-parameterized auxiliaries: one softmax block for `P(u)`,
/// one per row of `P(v|u)` and `P(x|v)`.
struct AuxParam {
    n_u: usize,
    n_v: usize,
    x_axis: Axis,
}

impl AuxParam {
    fn dim(&self) -> usize {
        let n_x = self.x_axis.size();
        self.n_u + self.n_u * self.n_v + self.n_v * n_x
    }

    fn materialize(&self, theta: &[f64]) -> Result<AuxiliaryModel> {
        let n_x = self.x_axis.size();
        let u_axis = Axis::new("u", Alphabet::indexed(self.n_u)?);
        let v_axis = Axis::new("v", Alphabet::indexed(self.n_v)?);

        let mut pu = vec![0.0; self.n_u];
        softmax_into(&theta[..self.n_u], &mut pu);
        // Softmax output sums to 1 up to rounding; nudge the largest
        // entry so the strict normalization check is met exactly.
        renormalize(&mut pu);
        let dist_u = Dist::new(vec![u_axis.clone()], pu)?;

        let mut v_rows = Vec::with_capacity(self.n_u);
        for i in 0..self.n_u {
            let base = self.n_u + i * self.n_v;
            let mut row = vec![0.0; self.n_v];
            softmax_into(&theta[base..base + self.n_v], &mut row);
            renormalize(&mut row);
            v_rows.push(row);
        }
        let chan_v = Channel::new(vec![u_axis], vec![v_axis.clone()], v_rows)?;

        let mut x_rows = Vec::with_capacity(self.n_v);
        for j in 0..self.n_v {
            let base = self.n_u + self.n_u * self.n_v + j * n_x;
            let mut row = vec![0.0; n_x];
            softmax_into(&theta[base..base + n_x], &mut row);
            renormalize(&mut row);
            x_rows.push(row);
        }
        let chan_x = Channel::new(vec![v_axis], vec![self.x_axis.clone()], x_rows)?;

        AuxiliaryModel::new(dist_u, chan_v, chan_x)
    }
}

fn renormalize(row: &mut [f64]) {
    let sum: f64 = row.iter().sum();
    let imax = row
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    row[imax] += 1.0 - sum;
}

/// Quasi-Newton ascent (BFGS update on the softmax parameters) with
/// central-difference gradients and backtracking line search.
fn maximize(
    objective: &impl Fn(&[f64]) -> Result<f64>,
    theta0: Vec<f64>,
    cfg: &OptimizerConfig,
) -> Result<(f64, Vec<f64>)> {
    let dim = theta0.len();
    let mut theta = theta0;
    let mut value = objective(&theta)?;
    let mut h: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut grad = numeric_gradient(objective, &theta, cfg.gradient_step)?;

    for _ in 0..cfg.max_iterations {
        // Ascent direction d = H g.
        let mut dir = vec![0.0; dim];
        for i in 0..dim {
            for j in 0..dim {
                dir[i] += h[i][j] * grad[j];
            }
        }
        let slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if slope <= cfg.tolerance {
            break;
        }
        // Backtracking on f(theta + a d) >= f + c a slope.
        let mut alpha = 1.0;
        let mut next = theta.clone();
        let mut next_value = value;
        let mut moved = false;
        for _ in 0..40 {
            for i in 0..dim {
                next[i] = theta[i] + alpha * dir[i];
            }
            let candidate = objective(&next)?;
            if candidate >= value + 1e-4 * alpha * slope {
                next_value = candidate;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
        // Expand while the step keeps paying off — optima on the simplex
        // boundary sit at infinity in softmax coordinates, and doubling
        // reaches them in logarithmically many accepted steps.
        while alpha < 1e6 {
            let mut wider = theta.clone();
            for i in 0..dim {
                wider[i] = theta[i] + 2.0 * alpha * dir[i];
            }
            let candidate = objective(&wider)?;
            if candidate > next_value + 1e-15 {
                alpha *= 2.0;
                next = wider;
                next_value = candidate;
            } else {
                break;
            }
        }
        let next_grad = numeric_gradient(objective, &next, cfg.gradient_step)?;
        // Inverse-Hessian update in the minimization convention for -f:
        // with s the step and ym the change of -grad, curvature needs
        // s.ym > 0 (else skip and keep the previous H).
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let ym: Vec<f64> = grad.iter().zip(&next_grad).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&ym).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            // H' = (I - rho s ym^T) H (I - rho ym s^T) + rho s s^T
            let mut hy = vec![0.0; dim];
            for i in 0..dim {
                for j in 0..dim {
                    hy[i] += h[i][j] * ym[j];
                }
            }
            let yhy: f64 = ym.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..dim {
                for j in 0..dim {
                    h[i][j] += -rho * (s[i] * hy[j] + hy[i] * s[j])
                        + rho * rho * yhy * s[i] * s[j]
                        + rho * s[i] * s[j];
                }
            }
        }
        let delta = next_value - value;
        theta = next;
        value = next_value;
        grad = next_grad;
        if delta.abs() < cfg.tolerance {
            break;
        }
    }
    Ok((value, theta))
}

fn numeric_gradient(
    objective: &impl Fn(&[f64]) -> Result<f64>,
    theta: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    let mut g = vec![0.0; theta.len()];
    let mut probe = theta.to_vec();
    for i in 0..theta.len() {
        probe[i] = theta[i] + step;
        let up = objective(&probe)?;
        probe[i] = theta[i] - step;
        let down = objective(&probe)?;
        probe[i] = theta[i];
        g[i] = (up - down) / (2.0 * step);
    }
    Ok(g)
}

/// Best found secrecy rate `max I(y:v|u) - I(z:v|u)` over auxiliaries
/// with the given alphabet sizes, by seeded multi-start quasi-Newton
/// ascent. Deterministic given the seed; restart spread is reported.
pub fn secrecy_capacity(
    channel: &Channel,
    n_u: usize,
    n_v: usize,
    cfg: &OptimizerConfig,
) -> Result<CapacityResult> {
    if n_u < 1 || n_v < 1 {
        return Err(RegionError::BadConfig("n_u and n_v must be at least 1".into()));
    }
    if channel.input_axes().len() != 1 || channel.output_axes().len() != 2 {
        return Err(RegionError::Composition(
            "secrecy capacity needs a single-input, two-output channel".into(),
        ));
    }
    let param = AuxParam { n_u, n_v, x_axis: channel.input_axes()[0].clone() };
    let objective = |theta: &[f64]| -> Result<f64> {
        let aux = param.materialize(theta)?;
        Ok(constraints_classical(channel, &aux)?.i_diff)
    };

    let runs: Vec<(f64, Vec<f64>)> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, r as u64));
            let theta0: Vec<f64> = (0..param.dim()).map(|_| rng.gen_range(-1.5..1.5)).collect();
            maximize(&objective, theta0, cfg)
        })
        .collect::<Result<_>>()?;

    let restart_values: Vec<f64> = runs.iter().map(|(v, _)| *v).collect();
    let best = runs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(b.0.cmp(&a.0)))
        .expect("at least one restart");
    let argmax = param.materialize(&best.1 .1)?;
    Ok(CapacityResult { value: best.1 .0, argmax, restart_values })
}

/// Shannon capacity `max_p I(y:x)` of a single-output channel by the
/// Blahut-Arimoto iteration, in nats. Stops when the duality gap
/// `max_x D(P(.|x) || q) - I` drops below `tol`.
pub fn channel_coding_capacity(channel: &Channel, tol: f64) -> Result<f64> {
    if channel.input_axes().len() != 1 {
        return Err(RegionError::Composition("capacity needs a single input axis".into()));
    }
    let n_in = channel.input_size();
    let n_out = channel.output_size();
    let rows = channel.rows();
    let mut p = vec![1.0 / n_in as f64; n_in];
    let mut q = vec![0.0; n_out];
    for _ in 0..100_000 {
        for y in 0..n_out {
            q[y] = (0..n_in).map(|x| p[x] * rows[x][y]).sum();
        }
        // Per-input divergence to the output mixture.
        let mut d = vec![0.0; n_in];
        for x in 0..n_in {
            let mut acc = 0.0;
            for y in 0..n_out {
                let w = rows[x][y];
                if w > 0.0 {
                    acc += w * (w / q[y]).ln();
                }
            }
            d[x] = acc;
        }
        let achieved: f64 = (0..n_in).map(|x| p[x] * d[x]).sum();
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if upper - achieved < tol {
            return Ok(achieved.max(0.0));
        }
        let mut norm = 0.0;
        for x in 0..n_in {
            p[x] *= d[x].exp();
            norm += p[x];
        }
        for w in p.iter_mut() {
            *w /= norm;
        }
    }
    Err(RegionError::BadConfig("Blahut-Arimoto did not converge".into()))
}
