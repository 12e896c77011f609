//! Joint distributions, encoders and their coordinates on the information plane.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::infotheory::{
    cond_entropy_of, entropy_of, is_zero, mi_of, CondMatrix, Matrix, ProbVector, Shaped, MASS_TOL,
};

/// Entries at or below this count as zero when deciding whether a row is one-hot.
pub const DETERMINISTIC_TOL: f64 = 1e-12;

/// Slack allowed on information inequalities that hold exactly in theory.
pub const INFO_TOL: f64 = 1e-9;

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// A finite joint distribution `p(x, y)` with every row carrying positive mass.
#[derive(Debug, Clone, PartialEq)]
pub struct JointXY {
    p: Matrix,
    px: Vec<f64>,
    py: Vec<f64>,
    x_labels: Vec<String>,
    y_labels: Vec<String>,
}

impl JointXY {
    /// Validates the matrix and drops zero-mass rows together with their labels.
    pub fn new(p: Matrix, x_labels: Vec<String>, y_labels: Vec<String>) -> Result<Self> {
        if p.rows() == 0 || p.cols() == 0 {
            return Err(Error::invalid("joint distribution must be non-empty"));
        }
        if x_labels.len() != p.rows() || y_labels.len() != p.cols() {
            return Err(Error::invalid(format!(
                "{} x labels and {} y labels for a {}x{} matrix",
                x_labels.len(),
                y_labels.len(),
                p.rows(),
                p.cols()
            )));
        }
        let mut total = 0.0;
        for (r, row) in p.iter_rows().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid(format!("p[{r}][{c}] = {v} is not a probability")));
                }
                total += v;
            }
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid(format!("joint distribution sums to {total}, expected 1")));
        }

        let keep: Vec<usize> = (0..p.rows())
            .filter(|&r| !is_zero(p.row(r).iter().sum::<f64>()))
            .collect();
        let cols = p.cols();
        let mut data = Vec::with_capacity(keep.len() * cols);
        for &r in &keep {
            data.extend_from_slice(p.row(r));
        }
        let p = Matrix::from_flat(keep.len(), cols, data)?;
        let x_labels = keep.iter().map(|&r| x_labels[r].clone()).collect();
        Ok(Self { px: p.row_sums(), py: p.col_sums(), p, x_labels, y_labels })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        let (r, c) = (m.rows(), m.cols());
        Self::new(m, default_labels("x", r), default_labels("y", c))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.p
    }

    pub fn x_card(&self) -> usize {
        self.p.rows()
    }

    pub fn y_card(&self) -> usize {
        self.p.cols()
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y_labels
    }

    pub fn p_x(&self) -> &[f64] {
        &self.px
    }

    pub fn p_y(&self) -> &[f64] {
        &self.py
    }

    pub fn h_y(&self) -> f64 {
        entropy_of(&self.py)
    }

    /// `p(y|x)`; rows are well defined because zero-mass rows were pruned.
    pub fn conditional(&self) -> CondMatrix {
        let mut m = self.p.clone();
        for (r, &px) in self.px.iter().enumerate() {
            m.row_mut(r).iter_mut().for_each(|v| *v /= px);
        }
        CondMatrix::from_matrix_unchecked(m)
    }

    /// The map `f` with `Y = f(X)` if every row has a single non-zero entry.
    pub fn deterministic_map(&self) -> Option<Vec<usize>> {
        self.p
            .iter_rows()
            .map(|row| {
                let mut hits = row.iter().enumerate().filter(|(_, &v)| v > DETERMINISTIC_TOL);
                match (hits.next(), hits.next()) {
                    (Some((c, _)), None) => Some(c),
                    _ => None,
                }
            })
            .collect()
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic_map().is_some()
    }

    /// Index of the first row that is not one-hot, if any.
    pub fn first_nondeterministic_row(&self) -> Option<usize> {
        self.p
            .iter_rows()
            .position(|row| row.iter().filter(|&&v| v > DETERMINISTIC_TOL).count() != 1)
    }

    pub(crate) fn require_deterministic(&self) -> Result<Vec<usize>> {
        self.deterministic_map().ok_or_else(|| {
            let row = self.first_nondeterministic_row().unwrap_or(0);
            Error::precondition(format!(
                "joint is not deterministic: row {row} ({}) has more than one non-zero entry",
                self.x_labels[row]
            ))
        })
    }

    /// Short stable hash of the probability matrix.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.p.rows() as u64).to_le_bytes());
        h.update((self.p.cols() as u64).to_le_bytes());
        for v in self.p.as_slice() {
            h.update(v.to_bits().to_le_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl Shaped for JointXY {
    fn shape(&self) -> (usize, usize) {
        self.p.shape()
    }
    fn values(&self) -> &[f64] {
        self.p.as_slice()
    }
}

/// Builds `p(x, f(x)) = p(x)`.
pub fn joint_from_function(f: &[usize], p_x: &ProbVector, y_card: usize) -> Result<JointXY> {
    if f.len() != p_x.len() {
        return Err(Error::invalid(format!(
            "map has {} entries for {} inputs",
            f.len(),
            p_x.len()
        )));
    }
    let mut m = Matrix::zeros(f.len(), y_card);
    for (x, (&y, &px)) in f.iter().zip(p_x.as_slice()).enumerate() {
        if y >= y_card {
            return Err(Error::invalid(format!("f({x}) = {y} is outside 0..{y_card}")));
        }
        m.set(x, y, px);
    }
    JointXY::new(m, default_labels("x", f.len()), default_labels("y", y_card))
}

/// A stochastic map `q(t|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    q: CondMatrix,
    t_labels: Vec<String>,
}

impl Encoder {
    pub fn new(q: CondMatrix, t_labels: Vec<String>) -> Result<Self> {
        if t_labels.len() != q.cols() {
            return Err(Error::invalid(format!(
                "{} t labels for {} columns",
                t_labels.len(),
                q.cols()
            )));
        }
        Ok(Self { q, t_labels })
    }

    pub fn from_cond(q: CondMatrix) -> Self {
        let n = q.cols();
        Self { q, t_labels: default_labels("t", n) }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::from_cond(CondMatrix::from_rows(rows)?))
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix) -> Self {
        Self::from_cond(CondMatrix::from_matrix_unchecked(m))
    }

    /// One-hot encoder `t = assign[x]`.
    pub fn deterministic(assign: &[usize], t_card: usize) -> Result<Self> {
        let mut m = Matrix::zeros(assign.len(), t_card);
        for (x, &t) in assign.iter().enumerate() {
            if t >= t_card {
                return Err(Error::invalid(format!("assignment {t} outside 0..{t_card}")));
            }
            m.set(x, t, 1.0);
        }
        Ok(Self::from_matrix_unchecked(m))
    }

    pub fn identity(n: usize) -> Self {
        let assign: Vec<usize> = (0..n).collect();
        Self::deterministic(&assign, n).expect("identity assignment is in range")
    }

    /// Every input mapped to the first of `t_card` symbols.
    pub fn constant(x_card: usize, t_card: usize) -> Self {
        Self::deterministic(&vec![0; x_card], t_card.max(1)).expect("0 is in range")
    }

    pub fn cond(&self) -> &CondMatrix {
        &self.q
    }

    pub fn matrix(&self) -> &Matrix {
        self.q.matrix()
    }

    pub fn x_card(&self) -> usize {
        self.q.rows()
    }

    pub fn t_card(&self) -> usize {
        self.q.cols()
    }

    pub fn t_labels(&self) -> &[String] {
        &self.t_labels
    }

    pub fn with_t_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.t_card() {
            return Err(Error::invalid("t label count does not match encoder width"));
        }
        self.t_labels = labels;
        Ok(self)
    }

    /// `assign[x]` when every row is one-hot.
    pub fn hard_assignment(&self) -> Option<Vec<usize>> {
        self.q
            .matrix()
            .iter_rows()
            .map(|row| {
                let mut hits = row.iter().enumerate().filter(|(_, &v)| v > DETERMINISTIC_TOL);
                match (hits.next(), hits.next()) {
                    (Some((t, _)), None) => Some(t),
                    _ => None,
                }
            })
            .collect()
    }

    /// The encoder obtained by applying `self` then `next`.
    pub fn compose(&self, next: &Encoder) -> Result<Encoder> {
        if self.t_card() != next.x_card() {
            return Err(Error::invalid(format!(
                "stage with {} outputs cannot feed a stage with {} inputs",
                self.t_card(),
                next.x_card()
            )));
        }
        let m = self.matrix().matmul(next.matrix())?;
        Ok(Encoder { q: CondMatrix::from_matrix_unchecked(m), t_labels: next.t_labels.clone() })
    }
}

/// Information-plane coordinates of a bottleneck variable, in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BottleneckReport {
    pub i_xt: f64,
    pub i_yt: f64,
    pub h_t: f64,
    pub h_y: f64,
}

impl BottleneckReport {
    pub const ZERO: BottleneckReport = BottleneckReport { i_xt: 0.0, i_yt: 0.0, h_t: 0.0, h_y: 0.0 };

    /// Data-processing and entropy upper bounds.
    pub fn is_consistent(&self) -> bool {
        self.i_xt >= -INFO_TOL
            && self.i_yt >= -INFO_TOL
            && self.i_yt <= self.i_xt + INFO_TOL
            && self.i_yt <= self.h_y + INFO_TOL
            && self.i_xt <= self.h_t + INFO_TOL
    }

    /// Euclidean distance on the `(i_xt, i_yt)` plane.
    pub fn plane_distance(&self, i_xt: f64, i_yt: f64) -> f64 {
        (self.i_xt - i_xt).hypot(self.i_yt - i_yt)
    }
}

fn check_encoder(joint: &JointXY, enc: &Encoder) -> Result<()> {
    if enc.x_card() != joint.x_card() {
        return Err(Error::invalid(format!(
            "encoder has {} rows but the joint has {} inputs",
            enc.x_card(),
            joint.x_card()
        )));
    }
    Ok(())
}

/// `p(y, t) = Σ_x p(x, y) q(t|x)`, as a |Y|×|T| matrix.
pub(crate) fn yt_joint(joint: &JointXY, enc: &Encoder) -> Matrix {
    let (ny, nt) = (joint.y_card(), enc.t_card());
    let mut m = Matrix::zeros(ny, nt);
    for x in 0..joint.x_card() {
        let q = enc.matrix().row(x);
        for (y, &pxy) in joint.matrix().row(x).iter().enumerate() {
            if pxy == 0.0 {
                continue;
            }
            for (o, &qt) in m.row_mut(y).iter_mut().zip(q) {
                *o += pxy * qt;
            }
        }
    }
    m
}

pub(crate) fn xt_joint(joint: &JointXY, enc: &Encoder) -> Matrix {
    let mut m = enc.matrix().clone();
    for (x, &px) in joint.p_x().iter().enumerate() {
        m.row_mut(x).iter_mut().for_each(|v| *v *= px);
    }
    m
}

pub(crate) fn report_unchecked(joint: &JointXY, enc: &Encoder) -> BottleneckReport {
    let xt = xt_joint(joint, enc);
    let yt = yt_joint(joint, enc);
    BottleneckReport {
        i_xt: mi_of(&xt),
        i_yt: mi_of(&yt),
        h_t: entropy_of(&xt.col_sums()),
        h_y: joint.h_y(),
    }
}

/// Exact information-plane coordinates of the bottleneck variable `enc` induces.
pub fn evaluate(joint: &JointXY, enc: &Encoder) -> Result<BottleneckReport> {
    check_encoder(joint, enc)?;
    Ok(report_unchecked(joint, enc))
}

/// Bayes posterior `p(y|t)`. Rows of symbols that carry no mass are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    rows: Vec<Option<Vec<f64>>>,
    t_marginal: Vec<f64>,
}

impl Posterior {
    pub fn row(&self, t: usize) -> Option<&[f64]> {
        self.rows[t].as_deref()
    }

    pub fn t_card(&self) -> usize {
        self.rows.len()
    }

    pub fn t_marginal(&self) -> &[f64] {
        &self.t_marginal
    }

    pub fn is_defined(&self, t: usize) -> bool {
        self.rows[t].is_some()
    }

    /// Fails if any row is undefined.
    pub fn to_cond_matrix(&self) -> Result<CondMatrix> {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(t, r)| r.clone().ok_or_else(|| Error::invalid(format!("posterior row {t} is undefined"))))
            .collect::<Result<Vec<_>>>()?;
        CondMatrix::from_rows(&rows)
    }
}

pub fn decoder_posterior(joint: &JointXY, enc: &Encoder) -> Result<Posterior> {
    check_encoder(joint, enc)?;
    let yt = yt_joint(joint, enc);
    let pt = yt.col_sums();
    let rows = (0..enc.t_card())
        .map(|t| {
            if is_zero(pt[t]) {
                None
            } else {
                Some((0..joint.y_card()).map(|y| yt.get(y, t) / pt[t]).collect())
            }
        })
        .collect();
    Ok(Posterior { rows, t_marginal: pt })
}

/// The four trade-off functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// `I(Y;T) − β I(X;T)`
    IbLagrangian,
    /// `I(Y;T) − β I(X;T)²`
    SquaredIb,
    /// `I(Y;T) − β H(T)`
    Dib,
    /// `I(Y;T) − β H(T)²`
    SquaredDib,
}

impl Objective {
    pub const ALL: [Objective; 4] =
        [Objective::IbLagrangian, Objective::SquaredIb, Objective::Dib, Objective::SquaredDib];

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::IbLagrangian => "ib-lagrangian",
            Objective::SquaredIb => "squared-ib",
            Objective::Dib => "dib",
            Objective::SquaredDib => "squared-dib",
        }
    }

    pub fn is_squared(self) -> bool {
        matches!(self, Objective::SquaredIb | Objective::SquaredDib)
    }

    /// Whether compression is measured by `H(T)` rather than `I(X;T)`.
    pub fn uses_entropy(self) -> bool {
        matches!(self, Objective::Dib | Objective::SquaredDib)
    }

    pub(crate) fn value(self, i_xt: f64, i_yt: f64, h_t: f64, beta: f64) -> f64 {
        match self {
            Objective::IbLagrangian => i_yt - beta * i_xt,
            Objective::SquaredIb => i_yt - beta * i_xt * i_xt,
            Objective::Dib => i_yt - beta * h_t,
            Objective::SquaredDib => i_yt - beta * h_t * h_t,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ib-lagrangian" | "ib" | "lagrangian" => Ok(Objective::IbLagrangian),
            "squared-ib" => Ok(Objective::SquaredIb),
            "dib" => Ok(Objective::Dib),
            "squared-dib" => Ok(Objective::SquaredDib),
            other => Err(Error::invalid(format!("unknown objective '{other}'"))),
        }
    }
}

pub fn objective_value(report: &BottleneckReport, objective: Objective, beta: f64) -> Result<f64> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::invalid(format!("beta must be a finite non-negative number, got {beta}")));
    }
    Ok(objective.value(report.i_xt, report.i_yt, report.h_t, beta))
}

/// Encoders applied in sequence: stage 1 reads X, stage k reads stage k−1.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerChain {
    stages: Vec<Encoder>,
}

impl LayerChain {
    pub fn new(stages: Vec<Encoder>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::invalid("a layer chain needs at least one stage"));
        }
        for (k, pair) in stages.windows(2).enumerate() {
            if pair[0].t_card() != pair[1].x_card() {
                return Err(Error::invalid(format!(
                    "stage {} emits {} symbols but stage {} reads {}",
                    k + 1,
                    pair[0].t_card(),
                    k + 2,
                    pair[1].x_card()
                )));
            }
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[Encoder] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// `q(t_k | x)` for every stage k.
    pub fn composed(&self) -> Vec<Encoder> {
        let mut out: Vec<Encoder> = Vec::with_capacity(self.stages.len());
        for stage in &self.stages {
            let next = match out.last() {
                Some(prev) => prev.compose(stage).expect("validated at construction"),
                None => stage.clone(),
            };
            out.push(next);
        }
        out
    }

    pub fn final_encoder(&self) -> Encoder {
        self.composed().pop().expect("non-empty chain")
    }
}

/// One report per stage. Both mutual-information sequences are non-increasing.
pub fn chain_evaluate(joint: &JointXY, chain: &LayerChain) -> Result<Vec<BottleneckReport>> {
    check_encoder(joint, &chain.stages[0])?;
    let reports: Vec<_> = chain.composed().iter().map(|e| report_unchecked(joint, e)).collect();
    for w in reports.windows(2) {
        debug_assert!(w[1].i_xt <= w[0].i_xt + INFO_TOL, "DPI violated on I(X;T)");
        debug_assert!(w[1].i_yt <= w[0].i_yt + INFO_TOL, "DPI violated on I(Y;T)");
    }
    Ok(reports)
}

/// Error probability of predicting the most probable class given the final
/// stage. Ties go to the lowest class index; symbols without mass are skipped.
pub fn point_prediction_error(joint: &JointXY, chain: &LayerChain) -> Result<f64> {
    check_encoder(joint, &chain.stages[0])?;
    let enc = chain.final_encoder();
    let yt = yt_joint(joint, &enc);
    let mut correct = 0.0;
    for t in 0..enc.t_card() {
        let mut best = f64::NEG_INFINITY;
        for y in 0..joint.y_card() {
            let v = yt.get(y, t);
            if v > best {
                best = v;
            }
        }
        if best > 0.0 {
            correct += best;
        }
    }
    Ok((1.0 - correct).max(0.0))
}

/// `H(Y | T)` for the bottleneck variable `enc` induces.
pub fn conditional_entropy_given(joint: &JointXY, enc: &Encoder) -> Result<f64> {
    check_encoder(joint, enc)?;
    Ok(cond_entropy_of(&yt_joint(joint, enc).transpose()))
}
