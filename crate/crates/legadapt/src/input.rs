//! Delimited numeric input.
//!
//! One observation per line; fields separated by commas or whitespace; lines
//! whose first non-blank character is `#`, and blank lines, are skipped. Numbers
//! use `.` as decimal point regardless of locale.

use std::path::Path;

use legadapt_core::estimators::{design_point, DensitySample, RegressionSample};

use crate::error::{Error, Result};

/// Largest allowed gap between a supplied `x` and the design point.
pub const DESIGN_TOLERANCE: f64 = 1e-9;
/// Offending lines listed in an out-of-range error.
const MAX_LISTED: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// 1-based line number in the file.
    pub line: u64,
    pub fields: Vec<f64>,
}

pub fn parse_rows(path: &Path, text: &str) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx as u64 + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .map(|f| {
                let v: f64 = f.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("not a number: {f:?}"),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse { path: path.to_path_buf(), line, msg: format!("non-finite value {f:?}") })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(Row { line, fields });
    }
    Ok(rows)
}

pub fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rows(path, &text)
}

fn column_count(path: &Path, rows: &[Row], allowed: &[usize]) -> Result<usize> {
    let Some(first) = rows.first() else {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    };
    let cols = first.fields.len();
    if !allowed.contains(&cols) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: first.line,
            msg: format!("expected {allowed:?} columns, found {cols}"),
        });
    }
    if let Some(bad) = rows.iter().find(|r| r.fields.len() != cols) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: bad.line,
            msg: format!("expected {cols} columns, found {}", bad.fields.len()),
        });
    }
    Ok(cols)
}

/// `y_1..y_n` in design order, or `x,y` pairs whose `x` column must equal
/// `-1 + 2i/n` within [`DESIGN_TOLERANCE`].
pub fn regression_from_rows(path: &Path, rows: &[Row]) -> Result<RegressionSample> {
    let cols = column_count(path, rows, &[1, 2])?;
    let n = rows.len();
    if cols == 2 {
        for (i, row) in rows.iter().enumerate() {
            let expected = design_point(n, i + 1);
            if (row.fields[0] - expected).abs() > DESIGN_TOLERANCE {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: row.line,
                    msg: format!(
                        "x = {} is off the design grid x_i = -1 + 2i/n (n = {n}); expected x_{} = {expected}",
                        row.fields[0],
                        i + 1
                    ),
                });
            }
        }
    }
    Ok(RegressionSample::new(rows.iter().map(|r| r.fields[cols - 1]).collect())?)
}

pub fn read_regression(path: &Path) -> Result<RegressionSample> {
    regression_from_rows(path, &read_rows(path)?)
}

/// Affine map of `[min, max]` onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rescale {
    pub min: f64,
    pub max: f64,
}

impl Rescale {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::Usage(format!("--rescale needs finite MIN < MAX, got {min} {max}")));
        }
        Ok(Rescale { min, max })
    }

    pub fn apply(&self, v: f64) -> f64 {
        -1.0 + 2.0 * (v - self.min) / (self.max - self.min)
    }
}

/// Single column of observations in `[-1, 1]`, or in `[min, max]` with a rescale.
pub fn density_from_rows(path: &Path, rows: &[Row], rescale: Option<Rescale>) -> Result<DensitySample> {
    column_count(path, rows, &[1])?;
    let mapped: Vec<(u64, f64)> =
        rows.iter().map(|r| (r.line, rescale.map_or(r.fields[0], |m| m.apply(r.fields[0])))).collect();
    let bad: Vec<&(u64, f64)> = mapped.iter().filter(|(_, v)| !(-1.0..=1.0).contains(v)).collect();
    if !bad.is_empty() {
        let listed: Vec<String> = bad.iter().take(MAX_LISTED).map(|(l, _)| l.to_string()).collect();
        let more = if bad.len() > MAX_LISTED { format!(" and {} more", bad.len() - MAX_LISTED) } else { String::new() };
        let hint = if rescale.is_none() { "; use --rescale MIN MAX for data on another interval" } else { "" };
        return Err(Error::Data(format!(
            "{}: {} value(s) outside [-1, 1] on line(s) {}{more}{hint}",
            path.display(),
            bad.len(),
            listed.join(", ")
        )));
    }
    Ok(DensitySample::new(mapped.into_iter().map(|(_, v)| v).collect())?)
}

pub fn read_density(path: &Path, rescale: Option<Rescale>) -> Result<DensitySample> {
    density_from_rows(path, &read_rows(path)?, rescale)
}
