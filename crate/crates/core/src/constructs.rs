//! Closed-form bottleneck variables for joints with `Y = f(X)`.
//!
//! When the label is a deterministic function of the input the IB curve is
//! `min(r, H(Y))`, and simple constructions sit exactly on it: the erasure
//! family `T_α`, the label copy `T = f(X)`, and hard clusterings `T = g(Y)`.

use serde::{Deserialize, Serialize};

use crate::bottleneck::{Encoder, JointXY, INFO_TOL};
use crate::error::{Error, Result};
use crate::infotheory::{is_zero, Matrix};

/// Label of the extra symbol the erasure family emits when the input is forgotten.
pub const ERASURE_LABEL: &str = "erased";

/// Largest class count for which set partitions are enumerated by default.
pub const DEFAULT_MAX_CLASSES: usize = 12;

/// Parameters of the erasure family: emit `f(x)` with probability `alpha`,
/// otherwise the erasure symbol (the last column).
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaFamily {
    pub alpha: f64,
    pub f: Vec<usize>,
    pub y_card: usize,
}

impl AlphaFamily {
    pub fn new(alpha: f64, f: Vec<usize>, y_card: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!("alpha = {alpha} outside [0, 1]")));
        }
        if let Some(&bad) = f.iter().find(|&&y| y >= y_card) {
            return Err(Error::invalid(format!("label {bad} outside 0..{y_card}")));
        }
        Ok(Self { alpha, f, y_card })
    }

    pub fn erasure_symbol(&self) -> usize {
        self.y_card
    }

    pub fn encoder(&self, y_labels: &[String]) -> Encoder {
        let mut m = Matrix::zeros(self.f.len(), self.y_card + 1);
        for (x, &y) in self.f.iter().enumerate() {
            // at α = 1 or 0 both writes hit distinct cells, one of them with 0
            m.set(x, y, self.alpha);
            m.set(x, self.y_card, 1.0 - self.alpha);
        }
        let mut labels: Vec<String> = y_labels.to_vec();
        labels.push(ERASURE_LABEL.to_string());
        Encoder::from_matrix_unchecked(m)
            .with_t_labels(labels)
            .expect("one label per class plus erasure")
    }
}

pub fn t_alpha_encoder(alpha: f64, joint: &JointXY) -> Result<Encoder> {
    let f = joint.require_deterministic()?;
    Ok(AlphaFamily::new(alpha, f, joint.y_card())?.encoder(joint.y_labels()))
}

/// `T = f(X)`, one symbol per class.
pub fn t_copy_encoder(joint: &JointXY) -> Result<Encoder> {
    let f = joint.require_deterministic()?;
    Encoder::deterministic(&f, joint.y_card())?.with_t_labels(joint.y_labels().to_vec())
}

/// `min(r, h_y)`: the IB curve of a deterministic joint.
pub fn deterministic_curve(r: f64, h_y: f64) -> Result<f64> {
    if !(r >= 0.0) || !(h_y >= 0.0) {
        return Err(Error::invalid(format!("curve arguments must be non-negative (r = {r}, h_y = {h_y})")));
    }
    Ok(r.min(h_y))
}

/// A map from classes to clusters `0..k` that uses every cluster.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HardClustering {
    g: Vec<usize>,
}

impl HardClustering {
    pub fn new(g: Vec<usize>) -> Result<Self> {
        if g.is_empty() {
            return Err(Error::invalid("clustering of an empty class set"));
        }
        let k = g.iter().max().map_or(0, |m| m + 1);
        let mut used = vec![false; k];
        for &c in &g {
            used[c] = true;
        }
        if let Some(gap) = used.iter().position(|u| !u) {
            return Err(Error::invalid(format!("cluster {gap} is unused; indices must be contiguous")));
        }
        Ok(Self { g })
    }

    pub fn identity(n: usize) -> Self {
        Self { g: (0..n).collect() }
    }

    pub fn map(&self) -> &[usize] {
        &self.g
    }

    pub fn num_classes(&self) -> usize {
        self.g.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.g.iter().max().map_or(0, |m| m + 1)
    }

    /// Cluster masses `p(t) = Σ_{y: g(y) = t} p(y)`.
    pub fn cluster_masses(&self, p_y: &[f64]) -> Vec<f64> {
        let mut m = vec![0.0; self.num_clusters()];
        for (&c, &p) in self.g.iter().zip(p_y) {
            m[c] += p;
        }
        m
    }
}

/// `t(x) = g(f(x))`.
pub fn hard_clustering_encoder(c: &HardClustering, joint: &JointXY) -> Result<Encoder> {
    let f = joint.require_deterministic()?;
    if c.num_classes() != joint.y_card() {
        return Err(Error::invalid(format!(
            "clustering covers {} classes, joint has {}",
            c.num_classes(),
            joint.y_card()
        )));
    }
    let assign: Vec<usize> = f.iter().map(|&y| c.g[y]).collect();
    Encoder::deterministic(&assign, c.num_clusters())
}

/// Restricted growth strings of length `n` in lexicographic order; each one
/// is a set partition of `0..n`.
#[derive(Debug, Clone)]
pub struct Partitions {
    current: Vec<usize>,
    // prefix_max[i] = max(current[..i]), with prefix_max[0] unused
    prefix_max: Vec<usize>,
    done: bool,
}

impl Partitions {
    pub fn new(n: usize) -> Self {
        Self { current: vec![0; n], prefix_max: vec![0; n], done: n == 0 }
    }

    fn advance(&mut self) -> bool {
        let n = self.current.len();
        for i in (1..n).rev() {
            if self.current[i] <= self.prefix_max[i] {
                self.current[i] += 1;
                let m = self.prefix_max[i].max(self.current[i]);
                for j in i + 1..n {
                    self.current[j] = 0;
                    self.prefix_max[j] = m;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for Partitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        self.done = !self.advance();
        Some(out)
    }
}

fn check_class_guard(num_classes: usize, max_classes: usize) -> Result<()> {
    if num_classes == 0 {
        return Err(Error::invalid("cannot partition an empty class set"));
    }
    if num_classes > max_classes {
        return Err(Error::resource(format!(
            "{num_classes} classes exceed the partition enumeration limit of {max_classes}"
        )));
    }
    Ok(())
}

/// Lazily enumerates every hard clustering of `num_classes` classes.
pub fn hard_clusterings(
    num_classes: usize,
    max_classes: usize,
) -> Result<impl Iterator<Item = HardClustering>> {
    check_class_guard(num_classes, max_classes)?;
    Ok(Partitions::new(num_classes).map(|g| HardClustering { g }))
}

pub fn enumerate_hard_clusterings(num_classes: usize, max_classes: usize) -> Result<Vec<HardClustering>> {
    Ok(hard_clusterings(num_classes, max_classes)?.collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub h_t: f64,
    pub i_yt: f64,
}

/// Upper envelope of the hard-clustering points of a deterministic joint.
/// Beyond `H(Y)` the curve is flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DibEnvelope {
    pub points: Vec<EnvelopePoint>,
    pub h_y: f64,
}

impl DibEnvelope {
    /// Best prediction reachable by a hard clustering with `H(T) <= h`.
    pub fn value_at(&self, h: f64) -> f64 {
        self.points
            .iter()
            .filter(|p| p.h_t <= h + INFO_TOL)
            .map(|p| p.i_yt)
            .fold(0.0, f64::max)
    }
}

/// `(H(T), I(Y;T))` for `T = g(Y)` from class masses alone.
pub(crate) fn clustering_point(g: &[usize], p_y: &[f64], k: usize) -> EnvelopePoint {
    let mut masses = vec![0.0; k];
    for (&c, &p) in g.iter().zip(p_y) {
        masses[c] += p;
    }
    let h_t = masses.iter().filter(|&&m| !is_zero(m)).map(|&m| -m * m.ln()).sum::<f64>();
    // I(Y;T) = Σ_y p(y) ln(p(y,t)/(p(y)p(t))) with p(y,t) = p(y) on t = g(y)
    let i_yt = g
        .iter()
        .zip(p_y)
        .filter(|(_, &p)| !is_zero(p))
        .map(|(&c, &p)| -p * masses[c].ln())
        .sum::<f64>();
    EnvelopePoint { h_t, i_yt }
}

/// Upper-left Pareto set of `(x, y)` points: increasing `x`, strictly
/// increasing `y`. Dominance comparisons use [`INFO_TOL`].
pub(crate) fn upper_left_front<T: Copy>(mut pts: Vec<(f64, f64, T)>) -> Vec<(f64, f64, T)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut front: Vec<(f64, f64, T)> = Vec::new();
    for p in pts {
        match front.last() {
            Some(last) if p.1 <= last.1 + INFO_TOL => {}
            Some(last) if (p.0 - last.0).abs() <= INFO_TOL => {
                *front.last_mut().unwrap() = p;
            }
            _ => front.push(p),
        }
    }
    front
}

pub fn dib_envelope(joint: &JointXY, max_classes: usize) -> Result<DibEnvelope> {
    joint.require_deterministic()?;
    let clusterings = hard_clusterings(joint.y_card(), max_classes)?;
    let p_y = joint.p_y();
    let mut pts = Vec::new();
    for c in clusterings {
        let k = c.num_clusters();
        let p = clustering_point(c.map(), p_y, k);
        pts.push((p.h_t, p.i_yt, ()));
    }
    let points = upper_left_front(pts)
        .into_iter()
        .map(|(h_t, i_yt, ())| EnvelopePoint { h_t, i_yt })
        .collect();
    Ok(DibEnvelope { points, h_y: joint.h_y() })
}
