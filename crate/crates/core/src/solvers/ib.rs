//! Alternating self-consistent updates for the IB Lagrangian and, through an
//! adaptive Lagrangian weight, for the squared-IB functional.
//!
//! One update block is
//!
//! ```text
//! q(t)    = Σ_x p(x) q(t|x)
//! p(y|t)  = Σ_x p(x,y) q(t|x) / q(t)
//! q(t|x) ∝ q(t) exp(−KL(p(y|x) ‖ p(y|t)) / β)
//! ```
//!
//! Stationary points of `I(Y;T) − β I(X;T)²` are stationary points of the
//! Lagrangian with weight `2β I(X;T)`, so the squared solver runs the same
//! block with that weight recomputed (and relaxed) after every step.

use crate::bottleneck::{Encoder, JointXY};
use crate::infotheory::{is_zero, Matrix};
use crate::rng::{fill_flat_simplex, rng_from_seed};

use super::{RunOutcome, SolverConfig, BETA_EFF_FLOOR};

/// Read-only view of the joint tuned for the update loop.
pub(crate) struct Problem {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub px: Vec<f64>,
    /// Non-zero `(y, p(x,y))` per input.
    pub pxy: Vec<Vec<(usize, f64)>>,
    /// Non-zero `(y, p(y|x))` per input.
    pub cond: Vec<Vec<(usize, f64)>>,
    /// `Σ_y p(y|x) ln p(y|x)` per input.
    pub neg_h_y_given_x: Vec<f64>,
    pub h_y: f64,
}

impl Problem {
    pub fn new(joint: &JointXY, nt: usize) -> Self {
        let px = joint.p_x().to_vec();
        let mut pxy = Vec::with_capacity(joint.x_card());
        let mut cond = Vec::with_capacity(joint.x_card());
        let mut neg_h = Vec::with_capacity(joint.x_card());
        for (x, row) in joint.matrix().iter_rows().enumerate() {
            let nz: Vec<(usize, f64)> = row
                .iter()
                .enumerate()
                .filter(|(_, &v)| !is_zero(v))
                .map(|(y, &v)| (y, v))
                .collect();
            let c: Vec<(usize, f64)> = nz.iter().map(|&(y, v)| (y, v / px[x])).collect();
            neg_h.push(c.iter().map(|&(_, v)| v * v.ln()).sum());
            pxy.push(nz);
            cond.push(c);
        }
        Self {
            nx: joint.x_card(),
            ny: joint.y_card(),
            nt,
            px,
            pxy,
            cond,
            neg_h_y_given_x: neg_h,
            h_y: joint.h_y(),
        }
    }
}

/// Marginals and information terms of the current encoder.
struct Stats {
    pt: Vec<f64>,
    /// `ln p(y|t)`, row-major `[t][y]`; `-inf` where the posterior is zero.
    ln_post: Vec<f64>,
    i_xt: f64,
    i_yt: f64,
}

fn stats(pr: &Problem, q: &[f64]) -> Stats {
    let (nt, ny) = (pr.nt, pr.ny);
    let mut pt = vec![0.0; nt];
    let mut pyt = vec![0.0; nt * ny];
    for x in 0..pr.nx {
        let qx = &q[x * nt..(x + 1) * nt];
        for (t, &v) in qx.iter().enumerate() {
            pt[t] += pr.px[x] * v;
        }
        for &(y, p) in &pr.pxy[x] {
            for (t, &v) in qx.iter().enumerate() {
                pyt[t * ny + y] += p * v;
            }
        }
    }
    let mut i_xt = 0.0;
    for x in 0..pr.nx {
        let qx = &q[x * nt..(x + 1) * nt];
        let mut acc = 0.0;
        for (t, &v) in qx.iter().enumerate() {
            if !is_zero(v) {
                acc += v * (v / pt[t]).ln();
            }
        }
        i_xt += pr.px[x] * acc;
    }
    let mut h_y_given_t = 0.0;
    let mut ln_post = vec![f64::NEG_INFINITY; nt * ny];
    for t in 0..nt {
        if is_zero(pt[t]) {
            continue;
        }
        for y in 0..ny {
            let v = pyt[t * ny + y];
            if !is_zero(v) {
                let l = (v / pt[t]).ln();
                ln_post[t * ny + y] = l;
                h_y_given_t -= v * l;
            }
        }
    }
    Stats { pt, ln_post, i_xt: i_xt.max(0.0), i_yt: (pr.h_y - h_y_given_t).max(0.0) }
}

/// `KL(p(y|x) ‖ p(y|t))`.
#[inline]
fn kl_row(pr: &Problem, s: &Stats, x: usize, t: usize) -> f64 {
    let lp = &s.ln_post[t * pr.ny..(t + 1) * pr.ny];
    let mut cross = 0.0;
    for &(y, c) in &pr.cond[x] {
        let l = lp[y];
        if l == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        cross += c * l;
    }
    (pr.neg_h_y_given_x[x] - cross).max(0.0)
}

/// One self-consistent update of `q` in place. `beta == 0` is the limit with
/// no compression pressure: each input goes to its closest posterior.
fn update(pr: &Problem, s: &Stats, q: &mut [f64], beta: f64, scratch: &mut [f64]) {
    let nt = pr.nt;
    for x in 0..pr.nx {
        let qx = &mut q[x * nt..(x + 1) * nt];
        if beta == 0.0 {
            let mut best = (f64::INFINITY, 0);
            for t in 0..nt {
                if is_zero(s.pt[t]) {
                    continue;
                }
                let d = kl_row(pr, s, x, t);
                if d < best.0 {
                    best = (d, t);
                }
            }
            qx.iter_mut().for_each(|v| *v = 0.0);
            qx[best.1] = 1.0;
            continue;
        }
        let inv_beta = 1.0 / beta;
        let mut max = f64::NEG_INFINITY;
        for t in 0..nt {
            scratch[t] = if is_zero(s.pt[t]) {
                f64::NEG_INFINITY
            } else {
                s.pt[t].ln() - inv_beta * kl_row(pr, s, x, t)
            };
            max = max.max(scratch[t]);
        }
        let mut total = 0.0;
        for t in 0..nt {
            let v = if scratch[t] == f64::NEG_INFINITY { 0.0 } else { (scratch[t] - max).exp() };
            qx[t] = v;
            total += v;
        }
        qx.iter_mut().for_each(|v| *v /= total);
    }
}

fn random_encoder(pr: &Problem, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let mut q = vec![0.0; pr.nx * pr.nt];
    for row in q.chunks_exact_mut(pr.nt) {
        fill_flat_simplex(&mut rng, row);
    }
    q
}

fn into_encoder(pr: &Problem, q: Vec<f64>) -> Encoder {
    Encoder::from_matrix_unchecked(Matrix::from_flat(pr.nx, pr.nt, q).expect("sized by construction"))
}

/// Drives the update loop. `weight` maps the current stats and the previous
/// weight to the Lagrangian weight of the next block; `value` is the
/// objective whose change decides convergence.
fn iterate<W, V>(pr: &Problem, cfg: &SolverConfig, seed: u64, mut weight: W, value: V) -> RunOutcome
where
    W: FnMut(&Stats, Option<f64>) -> f64,
    V: Fn(&Stats) -> f64,
{
    let mut q = random_encoder(pr, seed);
    let mut scratch = vec![0.0; pr.nt];
    let mut prev_value: Option<f64> = None;
    let mut prev_weight: Option<f64> = None;
    for it in 0..cfg.max_iters {
        let s = stats(pr, &q);
        let v = value(&s);
        if let Some(p) = prev_value {
            if (v - p).abs() < cfg.tol {
                return RunOutcome { encoder: into_encoder(pr, q), iterations: it, converged: true };
            }
        }
        prev_value = Some(v);
        let w = weight(&s, prev_weight);
        prev_weight = Some(w);
        update(pr, &s, &mut q, w, &mut scratch);
    }
    RunOutcome { encoder: into_encoder(pr, q), iterations: cfg.max_iters, converged: false }
}

pub(crate) fn run_lagrangian(joint: &JointXY, cfg: &SolverConfig, seed: u64) -> RunOutcome {
    let pr = Problem::new(joint, cfg.t_card_for(joint));
    let beta = cfg.beta;
    iterate(&pr, cfg, seed, |_, _| beta, |s| s.i_yt - beta * s.i_xt)
}

pub(crate) fn run_squared(joint: &JointXY, cfg: &SolverConfig, seed: u64) -> RunOutcome {
    let pr = Problem::new(joint, cfg.t_card_for(joint));
    let (beta, damping) = (cfg.beta, cfg.damping);
    if beta == 0.0 {
        return iterate(&pr, cfg, seed, |_, _| 0.0, |s| s.i_yt);
    }
    iterate(
        &pr,
        cfg,
        seed,
        |s, prev| {
            let target = (2.0 * beta * s.i_xt).max(BETA_EFF_FLOOR);
            match prev {
                Some(p) => (damping * target + (1.0 - damping) * p).max(BETA_EFF_FLOOR),
                None => target,
            }
        },
        |s| s.i_yt - beta * s.i_xt * s.i_xt,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bottleneck::{evaluate, joint_from_function};
    use crate::infotheory::ProbVector;

    #[test]
    fn stats_agree_with_evaluate() {
        let j = JointXY::from_rows(&[vec![0.3, 0.1, 0.0], vec![0.05, 0.25, 0.1], vec![0.0, 0.05, 0.15]]).unwrap();
        let pr = Problem::new(&j, 4);
        let q = random_encoder(&pr, 11);
        let s = stats(&pr, &q);
        let r = evaluate(&j, &into_encoder(&pr, q)).unwrap();
        assert!((s.i_xt - r.i_xt).abs() < 1e-12);
        assert!((s.i_yt - r.i_yt).abs() < 1e-12);
    }

    #[test]
    fn update_keeps_rows_normalized() {
        let f: Vec<usize> = (0..6).map(|x| x % 3).collect();
        let j = joint_from_function(&f, &ProbVector::uniform(6).unwrap(), 3).unwrap();
        let pr = Problem::new(&j, 7);
        let mut q = random_encoder(&pr, 3);
        let mut scratch = vec![0.0; 7];
        for beta in [0.0, 0.05, 0.7, 3.0] {
            let s = stats(&pr, &q);
            update(&pr, &s, &mut q, beta, &mut scratch);
            for row in q.chunks_exact(7) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
