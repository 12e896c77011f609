//! Iterative solvers for the four trade-off objectives, β-scan drivers and
//! exhaustive oracles for small instances.

mod dib;
mod ib;
pub mod oracle;
mod scan;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bottleneck::{evaluate, objective_value, BottleneckReport, Encoder, JointXY, Objective};
use crate::error::{Error, Result};
use crate::infotheory::mi_of;
use crate::rng::derive_seed;

pub use oracle::{brute_force_front, f_oracle, hard_cluster_front, ClusterPoint, FrontPoint};
pub use scan::{scan, ScanPoint, ScanResult};

pub const DEFAULT_MAX_ITERS: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_DAMPING: f64 = 0.5;

/// Lower limit on the adaptive Lagrangian weight of the squared objectives.
pub const BETA_EFF_FLOOR: f64 = 1e-6;

/// Joints whose mutual information is below this are treated as independent.
const ZERO_INFORMATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub beta: f64,
    /// Number of bottleneck symbols; `None` means `|X| + 1`.
    pub t_cardinality: Option<usize>,
    pub max_iters: usize,
    /// Stop once the objective changes by less than this (nats).
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Relaxation applied to the adaptive weight of the squared objectives.
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta: 0.5,
            t_cardinality: None,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            damping: DEFAULT_DAMPING,
        }
    }
}

impl SolverConfig {
    pub fn with_beta(beta: f64) -> Self {
        Self { beta, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::invalid(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be >= 1"));
        }
        if self.t_cardinality == Some(0) {
            return Err(Error::invalid("t_cardinality must be >= 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        Ok(())
    }

    pub fn t_card_for(&self, joint: &JointXY) -> usize {
        self.t_cardinality.unwrap_or(joint.x_card() + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub encoder: Encoder,
    pub report: BottleneckReport,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart_index: usize,
}

/// What a single restart hands back before evaluation.
pub(crate) struct RunOutcome {
    pub encoder: Encoder,
    pub iterations: usize,
    pub converged: bool,
}

fn finish(
    joint: &JointXY,
    objective: Objective,
    beta: f64,
    run: RunOutcome,
    restart_index: usize,
) -> Result<SolveResult> {
    let report = evaluate(joint, &run.encoder)?;
    let value = objective_value(&report, objective, beta)?;
    Ok(SolveResult {
        encoder: run.encoder,
        report,
        objective: value,
        iterations: run.iterations,
        converged: run.converged,
        restart_index,
    })
}

fn has_no_information(joint: &JointXY) -> bool {
    mi_of(joint.matrix()) < ZERO_INFORMATION
}

/// Runs every restart and keeps the best objective; ties go to the lowest
/// restart index.
fn best_of_restarts<F>(joint: &JointXY, objective: Objective, cfg: &SolverConfig, run: F) -> Result<SolveResult>
where
    F: Fn(u64) -> RunOutcome + Sync,
{
    cfg.validate()?;
    if has_no_information(joint) {
        let t_card = cfg.t_card_for(joint);
        let run = RunOutcome { encoder: Encoder::constant(joint.x_card(), t_card), iterations: 0, converged: true };
        return finish(joint, objective, cfg.beta, run, 0);
    }
    let results: Vec<Result<SolveResult>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| finish(joint, objective, cfg.beta, run(derive_seed(cfg.seed, r as u64)), r))
        .collect();
    let mut best: Option<SolveResult> = None;
    for res in results {
        let res = res?;
        if best.as_ref().is_none_or(|b| res.objective > b.objective) {
            best = Some(res);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Maximizes `I(Y;T) − β I(X;T)`.
pub fn solve_ib_lagrangian(joint: &JointXY, cfg: &SolverConfig) -> Result<SolveResult> {
    best_of_restarts(joint, Objective::IbLagrangian, cfg, |seed| ib::run_lagrangian(joint, cfg, seed))
}

/// Maximizes `I(Y;T) − β I(X;T)²`.
pub fn solve_squared_ib(joint: &JointXY, cfg: &SolverConfig) -> Result<SolveResult> {
    best_of_restarts(joint, Objective::SquaredIb, cfg, |seed| ib::run_squared(joint, cfg, seed))
}

/// Maximizes `I(Y;T) − β H(T)` over deterministic encoders.
pub fn solve_dib(joint: &JointXY, cfg: &SolverConfig) -> Result<SolveResult> {
    best_of_restarts(joint, Objective::Dib, cfg, |seed| dib::run(joint, cfg, seed, false))
}

/// Maximizes `I(Y;T) − β H(T)²` over deterministic encoders.
pub fn solve_squared_dib(joint: &JointXY, cfg: &SolverConfig) -> Result<SolveResult> {
    best_of_restarts(joint, Objective::SquaredDib, cfg, |seed| dib::run(joint, cfg, seed, true))
}

pub fn solve(joint: &JointXY, objective: Objective, cfg: &SolverConfig) -> Result<SolveResult> {
    match objective {
        Objective::IbLagrangian => solve_ib_lagrangian(joint, cfg),
        Objective::SquaredIb => solve_squared_ib(joint, cfg),
        Objective::Dib => solve_dib(joint, cfg),
        Objective::SquaredDib => solve_squared_dib(joint, cfg),
    }
}

/// Every restart's result, in restart order. Useful to study how often the
/// solver lands on a particular optimum.
pub fn solve_all_restarts(joint: &JointXY, objective: Objective, cfg: &SolverConfig) -> Result<Vec<SolveResult>> {
    cfg.validate()?;
    (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(cfg.seed, r as u64);
            let run = match objective {
                Objective::IbLagrangian => ib::run_lagrangian(joint, cfg, seed),
                Objective::SquaredIb => ib::run_squared(joint, cfg, seed),
                Objective::Dib => dib::run(joint, cfg, seed, false),
                Objective::SquaredDib => dib::run(joint, cfg, seed, true),
            };
            finish(joint, objective, cfg.beta, run, r)
        })
        .collect()
}
