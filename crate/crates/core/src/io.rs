//! Plain-text matrix files.
//!
//! The first non-empty line holds `rows cols`. Each following non-empty line
//! is one row, entries separated by commas and/or whitespace. Lines starting
//! with `#` are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub fn parse_matrix(text: &str) -> std::result::Result<DMatrix<f64>, String> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or("empty file")?;
    let dims: Vec<usize> = split(header)
        .map(|t| {
            t.parse::<usize>()
                .map_err(|e| format!("bad header '{header}': {e}"))
        })
        .collect::<std::result::Result<_, _>>()?;
    let [rows, cols] = dims[..] else {
        return Err(format!("header must be 'rows cols', got '{header}'"));
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for line in lines {
        seen += 1;
        let before = data.len();
        for tok in split(line) {
            data.push(
                tok.parse::<f64>()
                    .map_err(|e| format!("row {seen}: '{tok}': {e}"))?,
            );
        }
        if data.len() - before != cols {
            return Err(format!(
                "row {seen} has {} entries, expected {cols}",
                data.len() - before
            ));
        }
    }
    if seen != rows {
        return Err(format!("found {seen} rows, header says {rows}"));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err("non-finite entry".into());
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

fn split(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

/// Comma-separated rows with full round-trip precision.
pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text).map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix(m)).map_err(|e| Error::io(path, e))
}
