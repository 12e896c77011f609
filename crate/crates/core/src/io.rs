//! CSV and JSON formats for joints, encoders, scan results and bound reports.
//!
//! Matrices in CSV put the column labels in the first row (after a corner
//! cell) and the row labels in the first column. Numbers are written with 12
//! significant digits, so a parsed file serializes back to the same bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bottleneck::{Encoder, JointXY, Objective};
use crate::bounds::{BoundReport, Theorem};
use crate::error::{Error, Result};
use crate::infotheory::{CondMatrix, Matrix};
use crate::solvers::ScanResult;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Mass slack accepted when reading distributions from text. Twelve digits
/// per cell cannot carry totals to the in-memory tolerance, so totals within
/// this slack are renormalized on load.
pub const FILE_MASS_TOL: f64 = 1e-9;

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-4, 1e12)`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIGNIFICANT_DIGITS as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `v` rounded to what [`format_number`] writes.
pub fn round_number(v: f64) -> f64 {
    format_number(v).parse().unwrap_or(v)
}

fn parse_number(s: &str, row: usize, col: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse { row, col, msg: format!("'{s}' is not a number") })
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes())
}

fn csv_error(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { row, col: 0, msg: e.to_string() }
}

fn to_csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Format(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// A labelled matrix as it appears on disk. Rows and columns are 1-based in
/// error messages, counting the header row and label column.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Matrix,
}

pub fn parse_matrix_csv(text: &str) -> Result<LabelledMatrix> {
    let mut records = csv_reader(text).into_records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(Error::Parse { row: 1, col: 1, msg: "empty file".into() }),
    };
    let col_labels: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
    if col_labels.is_empty() {
        return Err(Error::Parse { row: 1, col: 2, msg: "header has no column labels".into() });
    }
    let mut row_labels = Vec::new();
    let mut data = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(csv_error)?;
        let row = i + 2;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if rec.len() != col_labels.len() + 1 {
            return Err(Error::Parse {
                row,
                col: rec.len().min(col_labels.len() + 1),
                msg: format!("expected {} fields, found {}", col_labels.len() + 1, rec.len()),
            });
        }
        row_labels.push(rec[0].trim().to_string());
        for (j, f) in rec.iter().enumerate().skip(1) {
            let v = parse_number(f, row, j + 1)?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parse { row, col: j + 1, msg: format!("{v} is not a probability") });
            }
            data.push(v);
        }
    }
    if row_labels.is_empty() {
        return Err(Error::Parse { row: 2, col: 1, msg: "no data rows".into() });
    }
    let values = Matrix::from_flat(row_labels.len(), col_labels.len(), data)?;
    Ok(LabelledMatrix { row_labels, col_labels, values })
}

pub fn matrix_to_csv(corner: &str, m: &LabelledMatrix) -> Result<String> {
    let header: Vec<&str> = std::iter::once(corner).chain(m.col_labels.iter().map(String::as_str)).collect();
    let rows = m.values.iter_rows().zip(&m.row_labels).map(|(r, label)| {
        std::iter::once(label.clone()).chain(r.iter().map(|&v| format_number(v))).collect()
    });
    to_csv_string(&header, rows)
}

#[derive(Serialize, Deserialize)]
struct JointDoc {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    p: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct EncoderDoc {
    x_labels: Vec<String>,
    t_labels: Vec<String>,
    q: Vec<Vec<f64>>,
}

fn rounded_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(|r| r.iter().map(|&v| round_number(v)).collect()).collect()
}

fn matrix_from_doc(rows: &[Vec<f64>], n_rows: usize, n_cols: usize, what: &str) -> Result<Matrix> {
    if rows.len() != n_rows {
        return Err(Error::Format(format!("{what} has {} rows but {n_rows} row labels", rows.len())));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n_cols {
            return Err(Error::Parse {
                row: i + 1,
                col: r.len(),
                msg: format!("{what} row has {} entries, expected {n_cols}", r.len()),
            });
        }
    }
    Matrix::from_rows(rows)
}

/// Rescales `values` to unit mass when they are within [`FILE_MASS_TOL`] of it.
fn renormalize(values: &mut [f64]) {
    let total: f64 = values.iter().sum();
    if total > 0.0 && (total - 1.0).abs() <= FILE_MASS_TOL {
        values.iter_mut().for_each(|v| *v /= total);
    }
}

fn renormalize_joint(m: Matrix) -> Result<Matrix> {
    let mut data = m.as_slice().to_vec();
    renormalize(&mut data);
    Matrix::from_flat(m.rows(), m.cols(), data)
}

fn renormalize_rows(mut m: Matrix) -> Matrix {
    for r in 0..m.rows() {
        renormalize(m.row_mut(r));
    }
    m
}

fn is_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

pub fn parse_joint_csv(text: &str) -> Result<JointXY> {
    let m = parse_matrix_csv(text)?;
    JointXY::new(renormalize_joint(m.values)?, m.row_labels, m.col_labels)
}

pub fn parse_joint_json(text: &str) -> Result<JointXY> {
    let doc: JointDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let m = matrix_from_doc(&doc.p, doc.x_labels.len(), doc.y_labels.len(), "p")?;
    JointXY::new(renormalize_joint(m)?, doc.x_labels, doc.y_labels)
}

/// Either format; JSON is recognized by its leading brace.
pub fn parse_joint(text: &str) -> Result<JointXY> {
    if is_json(text) {
        parse_joint_json(text)
    } else {
        parse_joint_csv(text)
    }
}

pub fn read_joint(path: &Path) -> Result<JointXY> {
    parse_joint(&fs::read_to_string(path)?)
}

pub fn joint_to_csv(joint: &JointXY) -> Result<String> {
    matrix_to_csv(
        "x",
        &LabelledMatrix {
            row_labels: joint.x_labels().to_vec(),
            col_labels: joint.y_labels().to_vec(),
            values: joint.matrix().clone(),
        },
    )
}

pub fn joint_to_json(joint: &JointXY) -> Result<String> {
    let doc = JointDoc {
        x_labels: joint.x_labels().to_vec(),
        y_labels: joint.y_labels().to_vec(),
        p: rounded_rows(joint.matrix()),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))
}

/// Parses an encoder file, returning the input labels alongside it.
pub fn parse_encoder(text: &str) -> Result<(Vec<String>, Encoder)> {
    let (x_labels, t_labels, m) = if is_json(text) {
        let doc: EncoderDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let m = matrix_from_doc(&doc.q, doc.x_labels.len(), doc.t_labels.len(), "q")?;
        (doc.x_labels, doc.t_labels, m)
    } else {
        let m = parse_matrix_csv(text)?;
        (m.row_labels, m.col_labels, m.values)
    };
    Ok((x_labels, Encoder::new(CondMatrix::new(renormalize_rows(m))?, t_labels)?))
}

pub fn encoder_to_csv(x_labels: &[String], enc: &Encoder) -> Result<String> {
    check_encoder_labels(x_labels, enc)?;
    matrix_to_csv(
        "x",
        &LabelledMatrix {
            row_labels: x_labels.to_vec(),
            col_labels: enc.t_labels().to_vec(),
            values: enc.matrix().clone(),
        },
    )
}

pub fn encoder_to_json(x_labels: &[String], enc: &Encoder) -> Result<String> {
    check_encoder_labels(x_labels, enc)?;
    serde_json::to_string_pretty(&encoder_doc(x_labels, enc)).map_err(|e| Error::Format(e.to_string()))
}

fn encoder_doc(x_labels: &[String], enc: &Encoder) -> EncoderDoc {
    EncoderDoc { x_labels: x_labels.to_vec(), t_labels: enc.t_labels().to_vec(), q: rounded_rows(enc.matrix()) }
}

fn check_encoder_labels(x_labels: &[String], enc: &Encoder) -> Result<()> {
    if x_labels.len() != enc.x_card() {
        return Err(Error::invalid(format!("{} x labels for an encoder over {} inputs", x_labels.len(), enc.x_card())));
    }
    Ok(())
}

pub const SCAN_COLUMNS: [&str; 8] =
    ["beta", "i_xt", "i_yt", "h_t", "objective", "iterations", "converged", "restart_index"];

/// One line of a scan CSV. A point whose solve failed has `NaN` coordinates
/// and no restart index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub beta: f64,
    pub i_xt: f64,
    pub i_yt: f64,
    pub h_t: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart_index: Option<usize>,
}

pub fn scan_rows(scan: &ScanResult) -> Vec<ScanRow> {
    scan.points
        .iter()
        .map(|p| match &p.result {
            Ok(r) => ScanRow {
                beta: p.beta,
                i_xt: r.report.i_xt,
                i_yt: r.report.i_yt,
                h_t: r.report.h_t,
                objective: r.objective,
                iterations: r.iterations,
                converged: r.converged,
                restart_index: Some(r.restart_index),
            },
            Err(_) => ScanRow {
                beta: p.beta,
                i_xt: f64::NAN,
                i_yt: f64::NAN,
                h_t: f64::NAN,
                objective: f64::NAN,
                iterations: 0,
                converged: false,
                restart_index: None,
            },
        })
        .collect()
}

pub fn scan_rows_to_csv(rows: &[ScanRow]) -> Result<String> {
    to_csv_string(
        &SCAN_COLUMNS,
        rows.iter().map(|r| {
            vec![
                format_number(r.beta),
                format_number(r.i_xt),
                format_number(r.i_yt),
                format_number(r.h_t),
                format_number(r.objective),
                r.iterations.to_string(),
                r.converged.to_string(),
                r.restart_index.map(|i| i.to_string()).unwrap_or_default(),
            ]
        }),
    )
}

pub fn scan_to_csv(scan: &ScanResult) -> Result<String> {
    scan_rows_to_csv(&scan_rows(scan))
}

fn check_header(rec: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    for (j, name) in expected.iter().enumerate() {
        let got = rec.get(j).map(str::trim);
        if got != Some(*name) {
            return Err(Error::Parse {
                row: 1,
                col: j + 1,
                msg: format!("expected column '{name}', found '{}'", got.unwrap_or("")),
            });
        }
    }
    if rec.len() != expected.len() {
        return Err(Error::Parse { row: 1, col: rec.len(), msg: format!("expected {} columns", expected.len()) });
    }
    Ok(())
}

/// Data records of a CSV with a fixed header, with their 1-based line numbers.
fn table_records(text: &str, header: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut records = csv_reader(text).into_records();
    match records.next() {
        Some(r) => check_header(&r.map_err(csv_error)?, header)?,
        None => return Err(Error::Parse { row: 1, col: 1, msg: "empty file".into() }),
    }
    let mut out = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(csv_error)?;
        let row = i + 2;
        if rec.len() != header.len() {
            return Err(Error::Parse { row, col: rec.len(), msg: format!("expected {} fields", header.len()) });
        }
        out.push((row, rec));
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(s: &str, row: usize, col: usize, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse { row, col, msg: format!("'{s}' is not a valid {what}") })
}

pub fn parse_scan_csv(text: &str) -> Result<Vec<ScanRow>> {
    table_records(text, &SCAN_COLUMNS)?
        .into_iter()
        .map(|(row, r)| {
            let restart = r[7].trim();
            Ok(ScanRow {
                beta: parse_number(&r[0], row, 1)?,
                i_xt: parse_number(&r[1], row, 2)?,
                i_yt: parse_number(&r[2], row, 3)?,
                h_t: parse_number(&r[3], row, 4)?,
                objective: parse_number(&r[4], row, 5)?,
                iterations: parse_field(&r[5], row, 6, "iteration count")?,
                converged: parse_field(&r[6], row, 7, "boolean")?,
                restart_index: if restart.is_empty() { None } else { Some(parse_field(restart, row, 8, "restart index")?) },
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPointDoc {
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i_xt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i_yt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restart_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// `q(t|x)` rows, present when encoders were requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub encoder: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanDoc {
    pub objective: Objective,
    pub joint_fingerprint: String,
    pub points: Vec<ScanPointDoc>,
}

pub fn scan_to_doc(scan: &ScanResult, with_encoders: bool) -> ScanDoc {
    let points = scan
        .points
        .iter()
        .map(|p| match &p.result {
            Ok(r) => ScanPointDoc {
                beta: round_number(p.beta),
                i_xt: Some(round_number(r.report.i_xt)),
                i_yt: Some(round_number(r.report.i_yt)),
                h_t: Some(round_number(r.report.h_t)),
                objective: Some(round_number(r.objective)),
                iterations: r.iterations,
                converged: r.converged,
                restart_index: Some(r.restart_index),
                error: None,
                encoder: with_encoders.then(|| rounded_rows(r.encoder.matrix())),
            },
            Err(e) => ScanPointDoc {
                beta: round_number(p.beta),
                i_xt: None,
                i_yt: None,
                h_t: None,
                objective: None,
                iterations: 0,
                converged: false,
                restart_index: None,
                error: Some(e.clone()),
                encoder: None,
            },
        })
        .collect();
    ScanDoc { objective: scan.objective, joint_fingerprint: scan.joint_fingerprint.clone(), points }
}

pub fn scan_to_json(scan: &ScanResult, with_encoders: bool) -> Result<String> {
    serde_json::to_string_pretty(&scan_to_doc(scan, with_encoders)).map_err(|e| Error::Format(e.to_string()))
}

pub const BOUND_COLUMNS: [&str; 9] =
    ["theorem", "epsilon_target", "epsilon_actual", "y_card", "measured", "bound", "margin", "holds", "notes"];

/// One line of a bound-report CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub theorem: Theorem,
    pub epsilon_target: f64,
    pub epsilon_actual: f64,
    pub y_card: usize,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
    pub notes: String,
}

impl From<&BoundReport> for BoundRow {
    fn from(r: &BoundReport) -> Self {
        Self {
            theorem: r.theorem,
            epsilon_target: r.epsilon_target,
            epsilon_actual: r.epsilon_actual,
            y_card: r.y_card,
            measured: r.measured,
            bound: r.bound,
            margin: r.margin,
            holds: r.holds,
            notes: r.notes.clone(),
        }
    }
}

pub fn bound_rows_to_csv(rows: &[BoundRow]) -> Result<String> {
    to_csv_string(
        &BOUND_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.theorem.to_string(),
                format_number(r.epsilon_target),
                format_number(r.epsilon_actual),
                r.y_card.to_string(),
                format_number(r.measured),
                format_number(r.bound),
                format_number(r.margin),
                r.holds.to_string(),
                r.notes.clone(),
            ]
        }),
    )
}

pub fn bounds_to_csv(reports: &[BoundReport]) -> Result<String> {
    bound_rows_to_csv(&reports.iter().map(BoundRow::from).collect::<Vec<_>>())
}

pub fn parse_bounds_csv(text: &str) -> Result<Vec<BoundRow>> {
    table_records(text, &BOUND_COLUMNS)?
        .into_iter()
        .map(|(row, r)| {
            Ok(BoundRow {
                theorem: r[0].trim().parse().map_err(|_| Error::Parse {
                    row,
                    col: 1,
                    msg: format!("unknown theorem '{}'", &r[0]),
                })?,
                epsilon_target: parse_number(&r[1], row, 2)?,
                epsilon_actual: parse_number(&r[2], row, 3)?,
                y_card: parse_field(&r[3], row, 4, "class count")?,
                measured: parse_number(&r[4], row, 5)?,
                bound: parse_number(&r[5], row, 6)?,
                margin: parse_number(&r[6], row, 7)?,
                holds: parse_field(&r[7], row, 8, "boolean")?,
                notes: r[8].to_string(),
            })
        })
        .collect()
}

/// A plain table of pre-formatted cells, for ad-hoc outputs such as
/// closed-form curves.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let header: Vec<&str> = self.header.iter().map(String::as_str).collect();
        to_csv_string(&header, self.rows.iter().cloned())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut records = csv_reader(text).into_records();
        let header: Vec<String> = match records.next() {
            Some(r) => r.map_err(csv_error)?.iter().map(str::to_string).collect(),
            None => return Err(Error::Parse { row: 1, col: 1, msg: "empty file".into() }),
        };
        let mut rows = Vec::new();
        for (i, rec) in records.enumerate() {
            let rec = rec.map_err(csv_error)?;
            if rec.len() != header.len() {
                return Err(Error::Parse { row: i + 2, col: rec.len(), msg: format!("expected {} fields", header.len()) });
            }
            rows.push(rec.iter().map(str::to_string).collect());
        }
        Ok(Self { header, rows })
    }
}
