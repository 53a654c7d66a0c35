//! Tabular artifacts: RFC-4180-style CSV with a header row, LF line
//! endings, `.` decimal point, and reals written with 17 significant
//! digits so files are reproducible bit-for-bit.

use std::fs;
use std::path::Path;

use phaselens_core::embed::TimeSeries;
use phaselens_core::Matrix;

use crate::error::PipelineError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
    Empty,
}

/// 17 significant digits, scientific notation.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(x) => fmt_real(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => escape(s),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: Vec<S>) -> Self {
        let headers: Vec<String> = headers.into_iter().map(Into::into).collect();
        assert!(!headers.is_empty(), "table needs at least one column");
        Self {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.headers.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }
}

/// Writes the table as CSV; tables without data rows are rejected.
pub fn emit_csv(table: &Table, path: &Path) -> Result<(), PipelineError> {
    if table.rows.is_empty() {
        return Err(PipelineError::EmptyTable {
            path: path.to_path_buf(),
        });
    }
    let mut out = String::new();
    out.push_str(
        &table
            .headers
            .iter()
            .map(|h| escape(h))
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push('\n');
    for row in &table.rows {
        out.push_str(
            &row.iter()
                .map(Cell::render)
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| PipelineError::io(path, e))
}

/// Reads a numeric CSV with a header row into column names and a matrix.
pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, Matrix), PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let parse_err = |reason: String| PipelineError::Parse {
        path: path.to_path_buf(),
        reason,
    };

    let mut lines = text.lines();
    let headers: Vec<String> = lines
        .next()
        .ok_or_else(|| parse_err("file is empty".into()))?
        .split(',')
        .map(|h| h.trim().to_string())
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != headers.len() {
            return Err(parse_err(format!(
                "line {}: expected {} fields, found {}",
                lineno + 2,
                headers.len(),
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(fields.len());
        for f in fields {
            let value: f64 = f
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("line {}: not a number: {f:?}", lineno + 2)))?;
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err("no data rows".into()));
    }
    Ok((headers, Matrix::from_rows(&rows)))
}

/// Reads a scalar series from a CSV: the first column not named `t` is the
/// series; a `t` column, when present, supplies the sampling step.
pub fn read_series_csv(path: &Path) -> Result<TimeSeries, PipelineError> {
    let (headers, matrix) = read_matrix_csv(path)?;
    let value_col = headers
        .iter()
        .position(|h| h != "t")
        .ok_or_else(|| PipelineError::Parse {
            path: path.to_path_buf(),
            reason: "no value column (only t)".into(),
        })?;
    let t_col = headers.iter().position(|h| h == "t");

    let dt = match t_col {
        Some(j) if matrix.rows() >= 2 => matrix[(1, j)] - matrix[(0, j)],
        _ => 1.0,
    };
    let samples = matrix.column(value_col);
    TimeSeries::new(samples, dt).map_err(PipelineError::from)
}
