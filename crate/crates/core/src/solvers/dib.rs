//! Hard-assignment solver for the deterministic-IB objectives.
//!
//! The first phase applies the assignment rule
//! `t(x) = argmax_t [ln q(t) − KL(p(y|x) ‖ p(y|t)) / β]` (with `β` replaced by
//! `2β H(T)` for the squared objective) until the assignment stops changing.
//! That rule cannot merge clusters whose posteriors have disjoint supports:
//! the divergence is infinite, which is the common case for deterministic
//! joints. The second phase therefore polishes the assignment with single-input
//! moves scored by the exact objective, including moves into an empty cluster.

use rand::Rng;

use crate::bottleneck::{Encoder, JointXY};
use crate::infotheory::is_zero;
use crate::rng::rng_from_seed;

use super::ib::Problem;
use super::{RunOutcome, SolverConfig, BETA_EFF_FLOOR};

const MOVE_GAIN: f64 = 1e-12;

struct Clusters<'a> {
    pr: &'a Problem,
    assign: Vec<usize>,
    pt: Vec<f64>,
    /// `p(y, t)`, row-major `[t][y]`.
    pyt: Vec<f64>,
}

impl<'a> Clusters<'a> {
    fn new(pr: &'a Problem, assign: Vec<usize>) -> Self {
        let mut c = Self { pr, assign, pt: vec![0.0; pr.nt], pyt: vec![0.0; pr.nt * pr.ny] };
        c.rebuild();
        c
    }

    fn rebuild(&mut self) {
        self.pt.iter_mut().for_each(|v| *v = 0.0);
        self.pyt.iter_mut().for_each(|v| *v = 0.0);
        for x in 0..self.pr.nx {
            self.add(x, self.assign[x], 1.0);
        }
    }

    fn add(&mut self, x: usize, t: usize, sign: f64) {
        let ny = self.pr.ny;
        self.pt[t] += sign * self.pr.px[x];
        for &(y, p) in &self.pr.pxy[x] {
            self.pyt[t * ny + y] += sign * p;
        }
    }

    /// `Σ_y p(y,t) ln p(y|t)` for cluster `t`, optionally with input `x`
    /// added (`sign = 1`) or removed (`sign = -1`).
    fn cond_term(&self, t: usize, x: Option<(usize, f64)>) -> f64 {
        let ny = self.pr.ny;
        let row = &self.pyt[t * ny..(t + 1) * ny];
        let sum = |vals: &[f64], pt: f64| -> f64 {
            if is_zero(pt) {
                return 0.0;
            }
            vals.iter().filter(|&&v| !is_zero(v)).map(|&v| v * (v / pt).ln()).sum()
        };
        match x {
            None => sum(row, self.pt[t]),
            Some((x, sign)) => {
                let mut buf = row.to_vec();
                for &(y, p) in &self.pr.pxy[x] {
                    buf[y] += sign * p;
                }
                sum(&buf, self.pt[t] + sign * self.pr.px[x])
            }
        }
    }

    fn mass_term(&self, t: usize, x: Option<(usize, f64)>) -> f64 {
        let mut pt = self.pt[t];
        if let Some((x, sign)) = x {
            pt += sign * self.pr.px[x];
        }
        if is_zero(pt) {
            0.0
        } else {
            -pt * pt.ln()
        }
    }

    fn h_t(&self) -> f64 {
        (0..self.pr.nt).map(|t| self.mass_term(t, None)).sum()
    }

    fn cond_sum(&self) -> f64 {
        (0..self.pr.nt).map(|t| self.cond_term(t, None)).sum()
    }

    fn ln_post(&self, t: usize, y: usize) -> f64 {
        let v = self.pyt[t * self.pr.ny + y];
        if is_zero(v) || is_zero(self.pt[t]) {
            f64::NEG_INFINITY
        } else {
            (v / self.pt[t]).ln()
        }
    }

    fn kl(&self, x: usize, t: usize) -> f64 {
        let mut cross = 0.0;
        for &(y, c) in &self.pr.cond[x] {
            let l = self.ln_post(t, y);
            if l == f64::NEG_INFINITY {
                return f64::INFINITY;
            }
            cross += c * l;
        }
        (self.pr.neg_h_y_given_x[x] - cross).max(0.0)
    }
}

fn objective(pr: &Problem, cond_sum: f64, h_t: f64, beta: f64, squared: bool) -> f64 {
    let i_yt = pr.h_y + cond_sum;
    if squared {
        i_yt - beta * h_t * h_t
    } else {
        i_yt - beta * h_t
    }
}

/// Synchronous application of the assignment rule. Returns whether anything moved.
fn rule_step(c: &mut Clusters<'_>, weight: f64) -> bool {
    let pr = c.pr;
    let mut next = c.assign.clone();
    for (x, slot) in next.iter_mut().enumerate() {
        let mut best = (f64::NEG_INFINITY, c.assign[x]);
        for t in 0..pr.nt {
            if is_zero(c.pt[t]) {
                continue;
            }
            let kl = c.kl(x, t);
            let score = if weight == 0.0 { -kl } else { c.pt[t].ln() - kl / weight };
            if score > best.0 {
                best = (score, t);
            }
        }
        *slot = best.1;
    }
    let moved = next != c.assign;
    c.assign = next;
    c.rebuild();
    moved
}

/// One sequential pass of exact single-input moves. Returns whether anything moved.
fn polish_sweep(c: &mut Clusters<'_>, beta: f64, squared: bool) -> bool {
    let pr = c.pr;
    let mut moved = false;
    for x in 0..pr.nx {
        let a = c.assign[x];
        let cond_sum = c.cond_sum();
        let h_t = c.h_t();
        let current = objective(pr, cond_sum, h_t, beta, squared);
        let cond_a = c.cond_term(a, None);
        let mass_a = c.mass_term(a, None);
        let cond_a_out = c.cond_term(a, Some((x, -1.0)));
        let mass_a_out = c.mass_term(a, Some((x, -1.0)));
        let first_empty = (0..pr.nt).find(|&t| t != a && is_zero(c.pt[t]));
        let mut best = (current + MOVE_GAIN, a);
        for b in 0..pr.nt {
            if b == a || (is_zero(c.pt[b]) && Some(b) != first_empty) {
                continue;
            }
            let cs = cond_sum - cond_a - c.cond_term(b, None) + cond_a_out + c.cond_term(b, Some((x, 1.0)));
            let hs = h_t - mass_a - c.mass_term(b, None) + mass_a_out + c.mass_term(b, Some((x, 1.0)));
            let v = objective(pr, cs, hs, beta, squared);
            if v > best.0 {
                best = (v, b);
            }
        }
        if best.1 != a {
            c.add(x, a, -1.0);
            c.add(x, best.1, 1.0);
            c.assign[x] = best.1;
            moved = true;
        }
    }
    // Incremental updates accumulate rounding; start the next sweep clean.
    c.rebuild();
    moved
}

pub(crate) fn run(joint: &JointXY, cfg: &SolverConfig, seed: u64, squared: bool) -> RunOutcome {
    let nt = cfg.t_card_for(joint);
    let pr = Problem::new(joint, nt);
    let mut rng = rng_from_seed(seed);
    let assign: Vec<usize> = (0..pr.nx).map(|_| rng.random_range(0..nt)).collect();
    let mut c = Clusters::new(&pr, assign);
    let beta = cfg.beta;

    // The rule can cycle under synchronous updates; keep half the budget for polishing.
    let rule_budget = cfg.max_iters / 2;
    let mut iterations = 0;
    let mut weight = if squared { (2.0 * beta * c.h_t()).max(BETA_EFF_FLOOR) } else { beta };
    while iterations < rule_budget {
        iterations += 1;
        if !rule_step(&mut c, weight) {
            break;
        }
        if squared {
            let target = (2.0 * beta * c.h_t()).max(BETA_EFF_FLOOR);
            weight = cfg.damping * target + (1.0 - cfg.damping) * weight;
        }
    }

    let mut converged = false;
    while iterations < cfg.max_iters {
        iterations += 1;
        if !polish_sweep(&mut c, beta, squared) {
            converged = true;
            break;
        }
    }
    let encoder = Encoder::deterministic(&c.assign, nt).expect("assignments are in range");
    RunOutcome { encoder, iterations, converged }
}
