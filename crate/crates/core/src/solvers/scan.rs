use rayon::prelude::*;

use crate::bottleneck::{JointXY, Objective};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

use super::{solve, SolveResult, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub beta: f64,
    /// The solver error message when this point failed.
    pub result: std::result::Result<SolveResult, String>,
}

impl ScanPoint {
    pub fn solved(&self) -> Option<&SolveResult> {
        self.result.as_ref().ok()
    }

    /// Failed outright or stopped at the iteration budget.
    pub fn is_failure(&self) -> bool {
        self.result.as_ref().map_or(true, |r| !r.converged)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub objective: Objective,
    pub joint_fingerprint: String,
    pub points: Vec<ScanPoint>,
}

impl ScanResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.is_failure()).count()
    }

    pub fn solved(&self) -> impl Iterator<Item = (f64, &SolveResult)> {
        self.points.iter().filter_map(|p| p.solved().map(|r| (p.beta, r)))
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("beta grid is empty"));
    }
    if let Some(b) = grid.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
        return Err(Error::invalid(format!("beta grid contains {b}; values must be finite and >= 0")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("beta grid must be strictly increasing"));
    }
    Ok(())
}

/// Solves `objective` at every β of the grid. Point `i` uses a seed derived
/// from `template.seed` and `i`, so results do not depend on execution order.
pub fn scan(joint: &JointXY, objective: Objective, grid: &[f64], template: &SolverConfig) -> Result<ScanResult> {
    validate_grid(grid)?;
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(i, &beta)| {
            let cfg = SolverConfig { beta, seed: derive_seed(template.seed, i as u64), ..template.clone() };
            ScanPoint { beta, result: solve(joint, objective, &cfg).map_err(|e| e.to_string()) }
        })
        .collect();
    Ok(ScanResult { objective, joint_fingerprint: joint.fingerprint(), points })
}
