//! Exhaustive references for small instances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bottleneck::{evaluate, JointXY, INFO_TOL};
use crate::constructs::{hard_clustering_encoder, hard_clusterings, upper_left_front, HardClustering, DEFAULT_MAX_CLASSES};
use crate::error::{Error, Result};
use crate::infotheory::entropy_of;

pub const MAX_ORACLE_INPUTS: usize = 4;
pub const MAX_ORACLE_T: usize = 3;
pub const MAX_ORACLE_GRID: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    pub i_xt: f64,
    pub i_yt: f64,
}

/// All points of the simplex with coordinates in multiples of `1/steps`.
fn simplex_grid(dim: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(dim: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() + 1 == dim {
            cur.push(left);
            out.push(cur.iter().map(|&k| k as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(dim, left - k, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, steps, steps, &mut Vec::with_capacity(dim), &mut out);
    out
}

struct GridEval<'a> {
    joint: &'a JointXY,
    rows: Vec<Vec<f64>>,
    row_entropy: Vec<f64>,
    nt: usize,
}

impl GridEval<'_> {
    fn point(&self, idx: &[usize], pt: &mut [f64], pyt: &mut [f64]) -> (f64, f64) {
        let nt = self.nt;
        pt.iter_mut().for_each(|v| *v = 0.0);
        pyt.iter_mut().for_each(|v| *v = 0.0);
        let mut h_t_given_x = 0.0;
        for (x, &i) in idx.iter().enumerate() {
            let q = &self.rows[i];
            let px = self.joint.p_x()[x];
            h_t_given_x += px * self.row_entropy[i];
            for t in 0..nt {
                pt[t] += px * q[t];
            }
            for (y, &p) in self.joint.matrix().row(x).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for t in 0..nt {
                    pyt[y * nt + t] += p * q[t];
                }
            }
        }
        let h_t = entropy_of(pt);
        let h_t_given_y = entropy_of(pyt) - self.joint.h_y();
        ((h_t - h_t_given_x).max(0.0), (h_t - h_t_given_y).max(0.0))
    }
}

/// Upper-left Pareto set of `(I(X;T), I(Y;T))` over every encoder whose rows
/// lie on a simplex grid with `grid_per_row` levels per coordinate.
pub fn brute_force_front(joint: &JointXY, t_cardinality: usize, grid_per_row: usize) -> Result<Vec<FrontPoint>> {
    if joint.x_card() > MAX_ORACLE_INPUTS {
        return Err(Error::resource(format!(
            "brute-force oracle handles at most {MAX_ORACLE_INPUTS} inputs, got {}",
            joint.x_card()
        )));
    }
    if t_cardinality == 0 || t_cardinality > MAX_ORACLE_T {
        return Err(Error::resource(format!(
            "brute-force oracle handles 1..={MAX_ORACLE_T} bottleneck symbols, got {t_cardinality}"
        )));
    }
    if !(2..=MAX_ORACLE_GRID).contains(&grid_per_row) {
        return Err(Error::resource(format!(
            "grid_per_row must lie in 2..={MAX_ORACLE_GRID}, got {grid_per_row}"
        )));
    }
    let rows = simplex_grid(t_cardinality, grid_per_row - 1);
    let row_entropy = rows.iter().map(|r| entropy_of(r)).collect();
    let ev = GridEval { joint, rows, row_entropy, nt: t_cardinality };
    let nx = joint.x_card();
    let m = ev.rows.len();

    let partial: Vec<Vec<(f64, f64, ())>> = (0..m)
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0usize; nx];
            idx[0] = first;
            let mut pt = vec![0.0; ev.nt];
            let mut pyt = vec![0.0; ev.nt * joint.y_card()];
            let mut pts = Vec::new();
            loop {
                let (a, b) = ev.point(&idx, &mut pt, &mut pyt);
                pts.push((a, b, ()));
                // odometer over inputs 1..nx
                let mut k = nx;
                loop {
                    if k == 1 {
                        return upper_left_front(pts);
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < m {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        })
        .collect();
    let merged = upper_left_front(partial.into_iter().flatten().collect());
    Ok(merged.into_iter().map(|(i_xt, i_yt, ())| FrontPoint { i_xt, i_yt }).collect())
}

/// Best prediction on a front subject to `I(X;T) <= r`.
pub fn f_oracle(front: &[FrontPoint], r: f64) -> f64 {
    front
        .iter()
        .filter(|p| p.i_xt <= r + INFO_TOL)
        .map(|p| p.i_yt)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPoint {
    pub clustering: HardClustering,
    pub h_t: f64,
    pub i_xt: f64,
    pub i_yt: f64,
}

/// Exact evaluation of every hard clustering of a deterministic joint, in
/// canonical partition order.
pub fn hard_cluster_front(joint: &JointXY) -> Result<Vec<ClusterPoint>> {
    joint.require_deterministic()?;
    let clusterings: Vec<HardClustering> = hard_clusterings(joint.y_card(), DEFAULT_MAX_CLASSES)?.collect();
    clusterings
        .into_par_iter()
        .map(|c| {
            let r = evaluate(joint, &hard_clustering_encoder(&c, joint)?)?;
            Ok(ClusterPoint { clustering: c, h_t: r.h_t, i_xt: r.i_xt, i_yt: r.i_yt })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bottleneck::joint_from_function;
    use crate::infotheory::{JointMatrix, ProbVector};

    #[test]
    fn simplex_grid_counts() {
        // C(steps + dim - 1, dim - 1)
        assert_eq!(simplex_grid(2, 20).len(), 21);
        assert_eq!(simplex_grid(3, 20).len(), 231);
        assert_eq!(simplex_grid(1, 20), vec![vec![1.0]]);
        for p in simplex_grid(3, 4) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn guards() {
        let j = joint_from_function(&[0, 1, 0, 1, 0], &ProbVector::uniform(5).unwrap(), 2).unwrap();
        assert!(matches!(brute_force_front(&j, 2, 5), Err(Error::ResourceLimit(_))));
        let j = joint_from_function(&[0, 1], &ProbVector::uniform(2).unwrap(), 2).unwrap();
        assert!(brute_force_front(&j, 4, 5).is_err());
        assert!(brute_force_front(&j, 2, 22).is_err());
        assert!(brute_force_front(&j, 2, 1).is_err());
    }

    #[test]
    fn diagonal_front_tracks_min_r_ln2() {
        let j = joint_from_function(&[0, 1], &ProbVector::uniform(2).unwrap(), 2).unwrap();
        let front = brute_force_front(&j, 2, 21).unwrap();
        let top = front.last().unwrap();
        assert!((top.i_xt - 2f64.ln()).abs() < 1e-12);
        assert!((top.i_yt - 2f64.ln()).abs() < 1e-12);
        for p in &front {
            assert!((p.i_yt - p.i_xt.min(2f64.ln())).abs() < 1e-9);
        }
    }

    #[test]
    fn independent_front_is_flat() {
        let p = ProbVector::new(vec![0.3, 0.7]).unwrap();
        let q = ProbVector::new(vec![0.6, 0.4]).unwrap();
        let m = JointMatrix::product(&p, &q).matrix().clone();
        let j = JointXY::new(m, vec!["a".into(), "b".into()], vec!["u".into(), "v".into()]).unwrap();
        let front = brute_force_front(&j, 2, 21).unwrap();
        assert!(front.iter().all(|p| p.i_yt < 1e-9));
    }

    #[test]
    fn diagonal_3x3_reaches_ln3() {
        let j = joint_from_function(&[0, 1, 2], &ProbVector::uniform(3).unwrap(), 3).unwrap();
        let front = brute_force_front(&j, 3, 21).unwrap();
        let top = front.last().unwrap();
        assert!((top.i_xt - 3f64.ln()).abs() < 1e-12);
        assert!((top.i_yt - 3f64.ln()).abs() < 1e-12);
        assert!((f_oracle(&front, 10.0) - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn hard_cluster_front_examples() {
        let j = joint_from_function(&[0, 1, 2, 3], &ProbVector::uniform(4).unwrap(), 4).unwrap();
        let pts = hard_cluster_front(&j).unwrap();
        assert_eq!(pts.len(), 15);
        let mut levels: Vec<f64> = pts.iter().map(|p| (p.h_t * 1e6).round() / 1e6).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        assert_eq!(levels.len(), 5);

        let j = joint_from_function(&[0, 1], &ProbVector::uniform(2).unwrap(), 2).unwrap();
        assert_eq!(hard_cluster_front(&j).unwrap().len(), 2);

        let px = ProbVector::new(vec![0.5, 0.25, 0.25]).unwrap();
        let j = joint_from_function(&[0, 1, 2], &px, 3).unwrap();
        let pts = hard_cluster_front(&j).unwrap();
        let merged = pts.iter().find(|p| p.clustering.map() == [0, 1, 1]).unwrap();
        assert!((merged.h_t - 2f64.ln()).abs() < 1e-12);
    }
}
