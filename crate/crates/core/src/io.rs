//! File formats: dense CSV and Matrix Market matrices, sample CSVs,
//! per-iteration trace CSVs and JSON run records.
//!
//! Floats are written in shortest round-trip form, switching to exponent
//! notation outside `[1e-5, 1e16)`, so every written value parses back to
//! the same bits.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::SymMatrix;
use crate::pista::{IterTrace, SolveResult, SolverConfig, Termination};
use crate::problems::{GraphKind, SampleSet};

/// Largest `|a[i][j] − a[j][i]|` accepted by the readers.
pub const SYMMETRY_TOL: f64 = 1e-12;

pub const SCHEMA_VERSION: &str = "v1";

pub const TRACE_HEADER: &str =
    "iter,f_total,min_subgrad_l1,min_subgrad_fro,nnz,step_t,linesearch_trials,wall_ms";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("matrix is not symmetric (max deviation {max_dev:e})")]
    AsymmetricInput { max_dev: f64 },
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("line {line} has {found} fields, expected {expected}")]
    RaggedRows {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("file contains no data")]
    EmptyFile,
    #[error("serialization error: {0}")]
    Serialization(String),
}

impl IoError {
    fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    DenseCsv,
    MatrixMarket,
}

impl MatrixFormat {
    /// `.mtx` selects Matrix Market; anything else is read as dense CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("mtx") => MatrixFormat::MatrixMarket,
            _ => MatrixFormat::DenseCsv,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(MatrixFormat::DenseCsv),
            "mtx" | "matrix-market" => Ok(MatrixFormat::MatrixMarket),
            other => Err(format!("unknown matrix format '{other}' (csv, mtx)")),
        }
    }
}

/// Shortest round-trip decimal, with exponent notation for very small or
/// very large magnitudes.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_field<T: FromStr>(field: &str, line: usize, column: usize) -> Result<T, IoError> {
    field
        .trim()
        .parse()
        .map_err(|_| IoError::parse(line, column, format!("cannot parse '{}'", field.trim())))
}

/// Non-blank lines as `(1-based line number, fields)`.
fn csv_rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| (k + 1, l.split(',').collect()))
}

/// Rectangular numeric CSV as `(rows, columns, row-major values)`.
fn parse_numeric_csv(text: &str) -> Result<(usize, usize, Vec<f64>), IoError> {
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (line, fields) in csv_rows(text) {
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected {
            return Err(IoError::RaggedRows {
                line,
                expected,
                found: fields.len(),
            });
        }
        for (k, f) in fields.iter().enumerate() {
            let v: f64 = parse_field(f, line, k + 1)?;
            if !v.is_finite() {
                return Err(IoError::parse(line, k + 1, "non-finite value"));
            }
            values.push(v);
        }
        rows += 1;
    }
    match width {
        Some(w) => Ok((rows, w, values)),
        None => Err(IoError::EmptyFile),
    }
}

fn checked_symmetric(n: usize, data: Vec<f64>) -> Result<SymMatrix, IoError> {
    let max_dev = SymMatrix::max_asymmetry(n, &data);
    if max_dev > SYMMETRY_TOL {
        return Err(IoError::AsymmetricInput { max_dev });
    }
    Ok(SymMatrix::symmetrized(n, data))
}

pub fn parse_dense_csv(text: &str) -> Result<SymMatrix, IoError> {
    let (rows, cols, data) = parse_numeric_csv(text)?;
    if rows != cols {
        return Err(IoError::Dimension(format!("{rows}x{cols} matrix is not square")));
    }
    checked_symmetric(rows, data)
}

/// Coordinate-format Matrix Market, `real` or `integer` field, `symmetric`
/// or `general` storage. Symmetric files may store either triangle.
pub fn parse_matrix_market(text: &str) -> Result<SymMatrix, IoError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, header) = lines.next().ok_or(IoError::EmptyFile)?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(IoError::parse(1, 1, "missing %%MatrixMarket matrix header"));
    }
    if tokens[2] != "coordinate" {
        return Err(IoError::parse(1, 1, format!("unsupported layout '{}'", tokens[2])));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(IoError::parse(1, 1, format!("unsupported field '{}'", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(IoError::parse(1, 1, format!("unsupported symmetry '{other}'"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or(IoError::EmptyFile)?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    if dims.len() != 3 {
        return Err(IoError::parse(size_line, 1, "size line must be 'rows cols entries'"));
    }
    let rows: usize = parse_field(dims[0], size_line, 1)?;
    let cols: usize = parse_field(dims[1], size_line, 2)?;
    let entries: usize = parse_field(dims[2], size_line, 3)?;
    if rows != cols {
        return Err(IoError::Dimension(format!("{rows}x{cols} matrix is not square")));
    }
    if rows == 0 {
        return Err(IoError::EmptyFile);
    }
    let n = rows;

    let mut data = vec![0.0; n * n];
    let mut filled = vec![false; n * n];
    let mut count = 0;
    let mut last_line = size_line;
    for (line, l) in body {
        last_line = line;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(IoError::parse(line, 1, "entry must be 'row col value'"));
        }
        let i: usize = parse_field(f[0], line, 1)?;
        let j: usize = parse_field(f[1], line, 2)?;
        let v: f64 = parse_field(f[2], line, 3)?;
        if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
            return Err(IoError::Dimension(format!(
                "entry ({i}, {j}) on line {line} outside {n}x{n}"
            )));
        }
        if !v.is_finite() {
            return Err(IoError::parse(line, 3, "non-finite value"));
        }
        let (i, j) = (i - 1, j - 1);
        if filled[i * n + j] {
            return Err(IoError::parse(line, 1, format!("duplicate entry ({}, {})", i + 1, j + 1)));
        }
        filled[i * n + j] = true;
        data[i * n + j] = v;
        if symmetric {
            if i != j && filled[j * n + i] {
                return Err(IoError::parse(line, 1, "both triangles stored in symmetric file"));
            }
            filled[j * n + i] = true;
            data[j * n + i] = v;
        }
        count += 1;
    }
    if count != entries {
        return Err(IoError::parse(
            last_line,
            1,
            format!("header declares {entries} entries, found {count}"),
        ));
    }
    checked_symmetric(n, data)
}

pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<SymMatrix, IoError> {
    let text = read_text(path)?;
    match format {
        MatrixFormat::DenseCsv => parse_dense_csv(&text),
        MatrixFormat::MatrixMarket => parse_matrix_market(&text),
    }
}

/// Symmetric coordinate Matrix Market text holding the exact nonzeros of
/// the lower triangle.
pub fn format_matrix_market(m: &SymMatrix) -> String {
    let n = m.n();
    let mut entries = Vec::new();
    for j in 0..n {
        for i in j..n {
            let v = m.get(i, j);
            if v != 0.0 {
                entries.push(format!("{} {} {}\n", i + 1, j + 1, format_f64(v)));
            }
        }
    }
    let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    out.push_str(&format!("{n} {n} {}\n", entries.len()));
    entries.iter().for_each(|e| out.push_str(e));
    out
}

pub fn write_matrix_market(m: &SymMatrix, path: &Path) -> Result<(), IoError> {
    write_text(path, &format_matrix_market(m))
}

fn format_rows<'a>(rows: impl Iterator<Item = &'a [f64]>) -> String {
    let mut out = String::new();
    for row in rows {
        let fields: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn format_dense_csv(m: &SymMatrix) -> String {
    format_rows((0..m.n()).map(|i| m.row(i)))
}

pub fn write_dense_csv(m: &SymMatrix, path: &Path) -> Result<(), IoError> {
    write_text(path, &format_dense_csv(m))
}

/// One sample per row. The seed of the returned set is 0.
pub fn parse_samples(text: &str) -> Result<SampleSet, IoError> {
    let (m, n, samples) = parse_numeric_csv(text)?;
    Ok(SampleSet {
        n,
        m,
        samples,
        seed: 0,
    })
}

pub fn read_samples(path: &Path) -> Result<SampleSet, IoError> {
    parse_samples(&read_text(path)?)
}

pub fn format_samples(samples: &SampleSet) -> String {
    format_rows((0..samples.m).map(|k| samples.row(k)))
}

pub fn write_samples(samples: &SampleSet, path: &Path) -> Result<(), IoError> {
    write_text(path, &format_samples(samples))
}

pub fn format_trace(traces: &[IterTrace]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for t in traces {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            t.iter,
            format_f64(t.f_total),
            format_f64(t.min_subgrad_l1),
            format_f64(t.min_subgrad_fro),
            t.nnz,
            format_f64(t.step_t),
            t.linesearch_trials,
            format_f64(t.wall_ms),
        ));
    }
    out
}

pub fn parse_trace(text: &str) -> Result<Vec<IterTrace>, IoError> {
    let mut rows = csv_rows(text);
    match rows.next() {
        Some((_, header)) if header.join(",") == TRACE_HEADER => {}
        Some((line, _)) => return Err(IoError::parse(line, 1, "unexpected trace header")),
        None => return Err(IoError::EmptyFile),
    }
    rows.map(|(line, f)| {
        if f.len() != 8 {
            return Err(IoError::RaggedRows {
                line,
                expected: 8,
                found: f.len(),
            });
        }
        Ok(IterTrace {
            iter: parse_field(f[0], line, 1)?,
            f_total: parse_field(f[1], line, 2)?,
            min_subgrad_l1: parse_field(f[2], line, 3)?,
            min_subgrad_fro: parse_field(f[3], line, 4)?,
            nnz: parse_field(f[4], line, 5)?,
            step_t: parse_field(f[5], line, 6)?,
            linesearch_trials: parse_field(f[6], line, 7)?,
            wall_ms: parse_field(f[7], line, 8)?,
        })
    })
    .collect()
}

pub fn write_trace(traces: &[IterTrace], path: &Path) -> Result<(), IoError> {
    write_text(path, &format_trace(traces))
}

pub fn read_trace(path: &Path) -> Result<Vec<IterTrace>, IoError> {
    parse_trace(&read_text(path)?)
}

/// Where the problem came from. Generated problems carry kind, seed and
/// shift; problems read from files leave them empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDescriptor {
    pub kind: Option<GraphKind>,
    pub n: usize,
    pub m: Option<usize>,
    pub alpha: f64,
    pub seed: Option<u64>,
    pub shift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub iterations: usize,
    pub termination: Termination,
    pub converged: bool,
    pub f_total: f64,
    pub min_subgrad_l1: f64,
    pub min_subgrad_fro: f64,
    pub nnz: usize,
    pub wall_seconds: f64,
}

impl RunSummary {
    pub fn from_result(result: &SolveResult, wall_seconds: f64) -> Self {
        Self {
            iterations: result.iterations,
            termination: result.termination,
            converged: result.converged,
            f_total: result.last.f_total,
            min_subgrad_l1: result.last.min_subgrad_l1,
            min_subgrad_fro: result.last.min_subgrad_fro,
            nnz: result.last.nnz,
            wall_seconds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: String,
    pub problem: ProblemDescriptor,
    pub solver: String,
    pub config: SolverConfig,
    pub summary: RunSummary,
}

impl RunRecord {
    pub fn new(
        problem: ProblemDescriptor,
        solver: impl Into<String>,
        config: SolverConfig,
        summary: RunSummary,
    ) -> Self {
        Self {
            schema: SCHEMA_VERSION.to_string(),
            problem,
            solver: solver.into(),
            config,
            summary,
        }
    }

    fn non_finite_field(&self) -> Option<&'static str> {
        let p = &self.problem;
        let c = &self.config;
        let s = &self.summary;
        [
            ("problem.alpha", Some(p.alpha)),
            ("problem.shift", p.shift),
            ("config.stop_rel", Some(c.stop_rel)),
            ("config.t_init", Some(c.t_init)),
            ("config.backtrack", Some(c.backtrack)),
            ("config.t_floor", Some(c.t_floor)),
            ("config.fallback_safety", Some(c.fallback_safety)),
            ("summary.f_total", Some(s.f_total)),
            ("summary.min_subgrad_l1", Some(s.min_subgrad_l1)),
            ("summary.min_subgrad_fro", Some(s.min_subgrad_fro)),
            ("summary.wall_seconds", Some(s.wall_seconds)),
        ]
        .into_iter()
        .find(|(_, v)| v.is_some_and(|v| !v.is_finite()))
        .map(|(name, _)| name)
    }
}

pub fn format_result(record: &RunRecord) -> Result<String, IoError> {
    if let Some(field) = record.non_finite_field() {
        return Err(IoError::Serialization(format!("{field} is not finite")));
    }
    let mut text =
        serde_json::to_string_pretty(record).map_err(|e| IoError::Serialization(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn parse_result(text: &str) -> Result<RunRecord, IoError> {
    let record: RunRecord =
        serde_json::from_str(text).map_err(|e| IoError::Serialization(e.to_string()))?;
    if record.schema != SCHEMA_VERSION {
        return Err(IoError::Serialization(format!(
            "unsupported schema '{}'",
            record.schema
        )));
    }
    Ok(record)
}

pub fn write_result(record: &RunRecord, path: &Path) -> Result<(), IoError> {
    write_text(path, &format_result(record)?)
}

pub fn read_result(path: &Path) -> Result<RunRecord, IoError> {
    parse_result(&read_text(path)?)
}
