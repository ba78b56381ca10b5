//! Text file formats: tab-separated report tables, field dumps, radial kernel
//! profiles and tabulated coefficient grids.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! values always produce equal bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nlhj_core::{Lattice, NodeClass, SolveState};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io { path: path.to_path_buf(), source }
}

/// A table with named columns, written as TSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_tsv(&self) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        fs::write(path, self.to_tsv()).map_err(|e| io_err(path, e))
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Active-node values with a `# t= h= alpha=` header line.
pub fn field_tsv(lattice: &Lattice, state: &SolveState, order: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# t={} h={} alpha={}", state.t, lattice.spacing(), order);
    let two = lattice.dim() == 2;
    out.push_str(if two { "x\ty\tu\tnode\n" } else { "x\tu\tnode\n" });
    for &idx in lattice.active() {
        let x = lattice.node(idx);
        let kind = if lattice.class(idx) == NodeClass::BoundaryTrace { "boundary" } else { "interior" };
        if two {
            let _ = writeln!(out, "{}\t{}\t{}\t{kind}", x[0], x[1], state.field.raw(idx));
        } else {
            let _ = writeln!(out, "{}\t{}\t{kind}", x[0], state.field.raw(idx));
        }
    }
    out
}

/// Numeric rows of a whitespace-separated file; `#` starts a comment and
/// a first line that does not parse is taken as a header.
fn numeric_rows(path: &Path, width: usize) -> Result<Vec<(usize, Vec<f64>)>, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if v.len() == width => rows.push((k + 1, v)),
            Ok(v) => {
                return Err(IoError::Format {
                    path: path.to_path_buf(),
                    line: k + 1,
                    message: format!("expected {width} columns, found {}", v.len()),
                })
            }
            Err(_) if rows.is_empty() => continue,
            Err(e) => {
                return Err(IoError::Format { path: path.to_path_buf(), line: k + 1, message: e.to_string() })
            }
        }
    }
    if rows.is_empty() {
        return Err(IoError::Format { path: path.to_path_buf(), line: 0, message: "no data rows".into() });
    }
    Ok(rows)
}

/// Two columns, radius and `K` value.
pub fn read_radial_profile(path: &Path) -> Result<(Vec<f64>, Vec<f64>), IoError> {
    let rows = numeric_rows(path, 2)?;
    Ok(rows.into_iter().map(|(_, v)| (v[0], v[1])).unzip())
}

/// Coefficient sampled on a tensor grid, interpolated (bi)linearly and held
/// constant beyond the last samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// `values[j * xs.len() + i]` at `(xs[i], ys[j])`.
    values: Vec<f64>,
}

/// Rows `x value` (1-D) or `x y value` (2-D) covering a full tensor grid in
/// any order.
pub fn read_grid_table(path: &Path, dim: usize) -> Result<GridTable, IoError> {
    let rows = numeric_rows(path, dim + 1)?;
    let fmt = |line: usize, message: String| IoError::Format { path: path.to_path_buf(), line, message };
    let axis = |a: usize| -> Vec<f64> {
        let mut v: Vec<f64> = rows.iter().map(|(_, r)| r[a]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let xs = axis(0);
    let ys = if dim == 2 { axis(1) } else { vec![0.0] };
    if xs.len() < 2 || (dim == 2 && ys.len() < 2) {
        return Err(fmt(0, "a table needs at least two samples per axis".into()));
    }
    let mut values = vec![f64::NAN; xs.len() * ys.len()];
    for (line, r) in &rows {
        let i = xs.binary_search_by(|v| v.total_cmp(&r[0])).expect("abscissa is listed");
        let j = if dim == 2 { ys.binary_search_by(|v| v.total_cmp(&r[1])).expect("ordinate is listed") } else { 0 };
        let slot = &mut values[j * xs.len() + i];
        if !slot.is_nan() {
            return Err(fmt(*line, "duplicate grid point".into()));
        }
        *slot = r[dim];
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(fmt(0, format!("grid is incomplete: {} points for a {}x{} grid", rows.len(), xs.len(), ys.len())));
    }
    Ok(GridTable { xs, ys, values })
}

fn bracket(axis: &[f64], v: f64) -> (usize, f64) {
    if v <= axis[0] {
        return (0, 0.0);
    }
    let n = axis.len();
    if v >= axis[n - 1] {
        return (n - 2, 1.0);
    }
    let i = axis.partition_point(|a| *a <= v) - 1;
    (i, (v - axis[i]) / (axis[i + 1] - axis[i]))
}

impl GridTable {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let nx = self.xs.len();
        let (i, s) = bracket(&self.xs, x);
        if self.ys.len() == 1 {
            return self.values[i] * (1.0 - s) + self.values[i + 1] * s;
        }
        let (j, r) = bracket(&self.ys, y);
        let at = |i: usize, j: usize| self.values[j * nx + i];
        (1.0 - r) * ((1.0 - s) * at(i, j) + s * at(i + 1, j)) + r * ((1.0 - s) * at(i, j + 1) + s * at(i + 1, j + 1))
    }
}
