//! Machine-readable outputs: JSON fit reports and comma-delimited tables.
//!
//! Floats are written in shortest round-trip form, so a report parsed back and
//! re-serialised is byte-identical.

use std::io::Write;
use std::path::Path;

use legadapt_core::confidence::ConfidenceReport;
use legadapt_core::estimators::{AdaptiveFit, Problem, TauScan};
use legadapt_core::legendre::EvalPoint;
use legadapt_core::quadrature::gauss_legendre_rule;
use serde::{Deserialize, Serialize};

use crate::campaign::{ProblemTag, TrialRecord};
use crate::error::{Error, Result};

/// Echo of the inputs that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitInput {
    pub path: String,
    pub grid: usize,
    /// Original interval mapped onto `[-1, 1]`.
    pub rescale: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfidenceSection {
    pub block_m: usize,
    pub block_raw: usize,
    pub block_clamped: bool,
    /// `[tau(M), tau(2M), tau(4M)]`.
    pub blocks: Option<[f64; 3]>,
    pub gamma_hat: Option<f64>,
    pub ci_radius: Option<f64>,
    pub degeneracy: Option<String>,
}

impl From<&ConfidenceReport> for ConfidenceSection {
    fn from(r: &ConfidenceReport) -> Self {
        ConfidenceSection {
            block_m: r.block.m,
            block_raw: r.block.raw,
            block_clamped: r.block.clamped,
            blocks: r.blocks.map(|(a, b, c)| [a, b, c]),
            gamma_hat: r.gamma_hat,
            ci_radius: r.radius,
            degeneracy: r.degenerate.map(|d| d.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitReport {
    pub tool_version: String,
    pub problem: ProblemTag,
    pub n: usize,
    pub n_selected: usize,
    pub tau_star: f64,
    pub confidence: ConfidenceSection,
    pub sigma2_hat: Option<f64>,
    /// Quadrature value of the integral of the fitted density.
    pub integral: Option<f64>,
    pub coefficients: Vec<f64>,
    pub grid: Vec<GridPoint>,
    pub input: FitInput,
}

impl FitReport {
    pub fn new(fit: &AdaptiveFit, scan: &TauScan, confidence: &ConfidenceReport, input: FitInput) -> Result<Self> {
        let problem = match fit.problem() {
            Problem::Regression => ProblemTag::Regression,
            Problem::Density => ProblemTag::Density,
        };
        let grid =
            EvalPoint::grid(input.grid).map(|p| GridPoint { x: p.get(), value: fit.evaluate(p.get()) }).collect();
        let integral = match problem {
            ProblemTag::Density => {
                let rule = gauss_legendre_rule(fit.n_selected() / 2 + 2)?;
                Some(rule.integrate(|x| fit.evaluate(x)))
            }
            ProblemTag::Regression => None,
        };
        Ok(FitReport {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            problem,
            n: fit.n(),
            n_selected: fit.n_selected(),
            tau_star: scan.tau_star(),
            confidence: confidence.into(),
            sigma2_hat: fit.sigma2_hat(),
            integral,
            coefficients: fit.coeffs().to_vec(),
            grid,
            input,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Data(format!("report: {e}")))
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Data(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    }
}

fn write_rows<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> csv::Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// `x,value` pairs.
pub fn write_grid<W: Write>(w: W, grid: &[GridPoint]) -> csv::Result<()> {
    write_rows(w, &["x", "value"], grid.iter().map(|p| vec![num(p.x), num(p.value)]))
}

/// `N,tau` pairs.
pub fn write_scan<W: Write>(w: W, scan: &TauScan) -> csv::Result<()> {
    write_rows(w, &["N", "tau"], scan.iter().map(|(k, t)| vec![k.to_string(), num(t)]))
}

pub const TRIAL_COLUMNS: [&str; 17] = [
    "n",
    "trial",
    "seed",
    "ise",
    "b_n",
    "ratio",
    "n_selected",
    "n0",
    "tau_star",
    "gamma_hat",
    "ci_radius",
    "covered",
    "refined_radius",
    "refined_covered",
    "sigma2_hat",
    "degeneracy",
    "error",
];

/// One row per trial; failed trials carry only `n`, `trial` and `error`.
pub fn write_trials<W: Write>(w: W, records: &[TrialRecord]) -> csv::Result<()> {
    let rows = records.iter().map(|rec| match &rec.outcome {
        Ok(r) => vec![
            r.n.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            num(r.ise),
            num(r.b_n),
            num(r.ratio),
            r.n_selected.to_string(),
            r.n0.to_string(),
            num(r.tau_star),
            opt_num(r.gamma_hat),
            opt_num(r.ci_radius),
            r.covered.to_string(),
            opt_num(r.refined_radius),
            r.refined_covered.to_string(),
            opt_num(r.sigma2_hat),
            opt(r.degeneracy.as_ref()),
            String::new(),
        ],
        Err(e) => {
            let mut row = vec![String::new(); TRIAL_COLUMNS.len()];
            row[0] = rec.n.to_string();
            row[1] = rec.trial.to_string();
            row[TRIAL_COLUMNS.len() - 1] = e.clone();
            row
        }
    });
    write_rows(w, &TRIAL_COLUMNS, rows)
}

/// Writes `contents` to `dir/name`, creating `dir`.
pub fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

/// Renders a table writer into a byte buffer.
pub fn render<F>(path_hint: &Path, f: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut Vec<u8>) -> csv::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| csv_error(path_hint, e))?;
    Ok(buf)
}
