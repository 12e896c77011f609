//! Exact information-theoretic quantities over finite discrete distributions.
//!
//! Everything is in nats. Entries below [`ZERO_CUTOFF`] are treated as exact
//! zeros before taking logarithms, so `0 ln 0 = 0` holds entry-wise and
//! sparse supports never produce NaN.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the total mass of a distribution.
pub const MASS_TOL: f64 = 1e-12;

/// Entries at or below this value are exact zeros for the purpose of logs.
pub const ZERO_CUTOFF: f64 = 1e-15;

#[inline]
pub(crate) fn is_zero(p: f64) -> bool {
    p <= ZERO_CUTOFF
}

/// `-p ln p` with the `0 ln 0 = 0` convention.
#[inline]
pub(crate) fn neg_plogp(p: f64) -> f64 {
    if is_zero(p) {
        0.0
    } else {
        -p * p.ln()
    }
}

pub(crate) fn entropy_of(p: &[f64]) -> f64 {
    p.iter().map(|&v| neg_plogp(v)).sum()
}

pub(crate) fn kl_of(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if is_zero(a) {
            continue;
        }
        if is_zero(b) {
            return f64::INFINITY;
        }
        acc += a * (a / b).ln();
    }
    // Rounding can leave a tiny negative sum for near-identical inputs.
    acc.max(0.0)
}

fn check_probs(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::invalid(format!("{what} has dimension 0")));
    }
    let mut total = 0.0;
    for (i, &v) in p.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::invalid(format!("{what}[{i}] = {v} is not a probability")));
        }
        total += v;
    }
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::invalid(format!("{what} sums to {total}, expected 1")));
    }
    Ok(())
}

/// Anything that is a fixed-shape array of probabilities.
pub trait Shaped {
    fn shape(&self) -> (usize, usize);
    fn values(&self) -> &[f64];
}

/// A validated probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probs(&probs, "probability vector")?;
        Ok(Self(probs))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("uniform distribution over 0 outcomes"));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::invalid(format!("point mass at {at} outside 0..{n}")));
        }
        let mut v = vec![0.0; n];
        v[at] = 1.0;
        Ok(Self(v))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(p: ProbVector) -> Self {
        p.0
    }
}

impl Shaped for ProbVector {
    fn shape(&self) -> (usize, usize) {
        (1, self.0.len())
    }
    fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Dense row-major matrix of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged matrix rows"));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics; a matrix with zero columns has no data.
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter_rows().map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.iter_rows().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for row in self.iter_rows() {
            for (acc, v) in s.iter_mut().zip(row) {
                *acc += v;
            }
        }
        s
    }

    /// Standard matrix product.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                for (o, &b) in out.row_mut(r).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }
}

impl Shaped for Matrix {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    fn values(&self) -> &[f64] {
        &self.data
    }
}

/// A row-stochastic matrix: every row is a probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CondMatrix(Matrix);

impl CondMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows() == 0 || m.cols() == 0 {
            return Err(Error::invalid("conditional matrix must be non-empty"));
        }
        for (i, row) in m.iter_rows().enumerate() {
            check_probs(row, &format!("row {i}"))?;
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        self.0.row(r)
    }
}

impl Shaped for CondMatrix {
    fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }
    fn values(&self) -> &[f64] {
        self.0.values()
    }
}

/// A joint distribution over (row outcome, column outcome).
#[derive(Debug, Clone, PartialEq)]
pub struct JointMatrix(Matrix);

impl JointMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        check_probs(m.as_slice(), "joint distribution")?;
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Outer product `p(r) q(c)`.
    pub fn product(p: &ProbVector, q: &ProbVector) -> Self {
        let mut m = Matrix::zeros(p.len(), q.len());
        for (r, &a) in p.as_slice().iter().enumerate() {
            for (c, &b) in q.as_slice().iter().enumerate() {
                m.set(r, c, a * b);
            }
        }
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.0.row_sums()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        self.0.col_sums()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }
}

impl Shaped for JointMatrix {
    fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }
    fn values(&self) -> &[f64] {
        self.0.values()
    }
}

/// Shannon entropy `-Σ p ln p`.
pub fn entropy(p: &ProbVector) -> f64 {
    entropy_of(p.as_slice())
}

/// Binary entropy function.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("binary entropy argument {x} outside [0, 1]")));
    }
    Ok(neg_plogp(x) + neg_plogp(1.0 - x))
}

/// `KL(p ‖ q)`; `+inf` when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl_divergence(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!(
            "KL dimension mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(kl_of(p.as_slice(), q.as_slice()))
}

pub(crate) fn mi_of(m: &Matrix) -> f64 {
    let rm = m.row_sums();
    let cm = m.col_sums();
    let mut acc = 0.0;
    for (r, row) in m.iter_rows().enumerate() {
        for (c, &p) in row.iter().enumerate() {
            if is_zero(p) {
                continue;
            }
            acc += p * (p / (rm[r] * cm[c])).ln();
        }
    }
    acc.max(0.0)
}

/// Mutual information between the row and column variables.
pub fn mutual_information(joint: &JointMatrix) -> f64 {
    mi_of(joint.matrix())
}

pub(crate) fn cond_entropy_of(m: &Matrix) -> f64 {
    let h_joint = entropy_of(m.as_slice());
    let h_rows = entropy_of(&m.row_sums());
    (h_joint - h_rows).max(0.0)
}

/// `H(column | row)`.
pub fn conditional_entropy(joint: &JointMatrix) -> f64 {
    cond_entropy_of(joint.matrix())
}

/// Sum of absolute entry-wise differences.
pub fn l1_distance<A: Shaped + ?Sized>(a: &A, b: &A) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::invalid(format!(
            "l1 shape mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum())
}

/// Fano upper bound on `H(Y | Ŷ)` given error probability `p_err` over
/// `num_classes` outcomes.
pub fn fano_bound(p_err: f64, num_classes: usize) -> Result<f64> {
    if num_classes < 2 {
        return Err(Error::invalid(format!("Fano bound needs >= 2 classes, got {num_classes}")));
    }
    let h = binary_entropy(p_err)?;
    Ok(h + p_err * ((num_classes - 1) as f64).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossEntropyTerms {
    pub ce_loss: f64,
    pub cond_entropy: f64,
    pub kl_term: f64,
}

/// Splits the expected cross-entropy loss of a decoder `q(ŷ|t)` into the
/// conditional entropy `H(Y|T)` and the expected `KL(p(y|t) ‖ q(ŷ|t))`.
pub fn cross_entropy_decomposition(
    posterior: &CondMatrix,
    decoder: &CondMatrix,
    t_marginal: &ProbVector,
) -> Result<CrossEntropyTerms> {
    if posterior.shape() != decoder.shape() {
        return Err(Error::invalid(format!(
            "posterior {:?} and decoder {:?} differ in shape",
            posterior.shape(),
            decoder.shape()
        )));
    }
    if t_marginal.len() != posterior.rows() {
        return Err(Error::invalid(format!(
            "t marginal has {} entries for {} rows",
            t_marginal.len(),
            posterior.rows()
        )));
    }
    let mut ce = 0.0;
    let mut h = 0.0;
    let mut kl = 0.0;
    for (t, &pt) in t_marginal.as_slice().iter().enumerate() {
        if is_zero(pt) {
            continue;
        }
        let p = posterior.row(t);
        let q = decoder.row(t);
        let mut row_ce = 0.0;
        for (&a, &b) in p.iter().zip(q) {
            if is_zero(a) {
                continue;
            }
            row_ce += if is_zero(b) { f64::INFINITY } else { -a * b.ln() };
        }
        ce += pt * row_ce;
        h += pt * entropy_of(p);
        kl += pt * kl_of(p, q);
    }
    Ok(CrossEntropyTerms { ce_loss: ce, cond_entropy: h, kl_term: kl })
}
