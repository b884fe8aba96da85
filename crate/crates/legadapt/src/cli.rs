//! `legadapt` subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use legadapt_core::confidence::confidence_report;
use legadapt_core::estimators::{fit_adaptive, Sample};

use crate::campaign::{run_campaign, CampaignConfig};
use crate::error::{Error, Result};
use crate::input::{read_density, read_regression, Rescale};
use crate::report::{self, FitInput, FitReport};

#[derive(Debug, Parser)]
#[command(name = "legadapt", version, about = "Adaptive Fourier-Legendre regression and density estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a regression curve to y values on the design x_i = -1 + 2i/n.
    FitReg(FitArgs),
    /// Fit a density to a sample on [-1, 1].
    FitDen(FitArgs),
    /// Print the (N, tau) scan table for a data file.
    Scan(ScanArgs),
    /// Run a Monte Carlo campaign from a TOML config.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    pub input: PathBuf,
    /// Directory for report.json (and tables); stdout when absent.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Number of evaluation points on [-1, 1].
    #[arg(long, value_name = "K", default_value_t = 101)]
    pub grid: usize,
    /// Map data on [MIN, MAX] affinely onto [-1, 1] (density input only).
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_negative_numbers = true)]
    pub rescale: Option<Vec<f64>>,
    /// Also write grid.csv and scan.csv into --out.
    #[arg(long)]
    pub tables: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    pub input: PathBuf,
    /// Treat the input as a density sample instead of regression responses.
    #[arg(long)]
    pub density: bool,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_negative_numbers = true)]
    pub rescale: Option<Vec<f64>>,
    /// Directory for scan.csv; stdout when absent.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub config: PathBuf,
    /// Override the config's seed base.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Override the number of trials per sample size.
    #[arg(long, value_name = "COUNT")]
    pub trials: Option<usize>,
    /// Evaluate the [acceptance] thresholds; exit 3 on failure.
    #[arg(long)]
    pub check: bool,
    /// Directory for summary.json and trials.csv; summary to stdout when absent.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

fn rescale(v: &Option<Vec<f64>>) -> Result<Option<Rescale>> {
    v.as_ref().map(|v| Rescale::new(v[0], v[1])).transpose()
}

fn emit(out: Option<&Path>, name: &str, contents: &[u8]) -> Result<()> {
    match out {
        Some(dir) => report::write_file(dir, name, contents),
        None => std::io::stdout().write_all(contents).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn fit(args: &FitArgs, density: bool) -> Result<()> {
    if args.grid == 0 {
        return Err(Error::Usage("--grid must be at least 1".into()));
    }
    if args.tables && args.out.is_none() {
        return Err(Error::Usage("--tables needs --out DIR".into()));
    }
    let map = rescale(&args.rescale)?;
    let sample: Box<dyn Sample> = if density {
        Box::new(read_density(&args.input, map)?)
    } else {
        if map.is_some() {
            return Err(Error::Usage("--rescale applies to density input only".into()));
        }
        Box::new(read_regression(&args.input)?)
    };
    let (fit, scan) = fit_adaptive(sample.as_ref())?;
    let conf = confidence_report(&scan);
    let input =
        FitInput { path: args.input.display().to_string(), grid: args.grid, rescale: map.map(|m| [m.min, m.max]) };
    let rep = FitReport::new(&fit, &scan, &conf, input)?;
    emit(args.out.as_deref(), "report.json", rep.to_json()?.as_bytes())?;
    if let (true, Some(dir)) = (args.tables, args.out.as_deref()) {
        let grid = report::render(&dir.join("grid.csv"), |w| report::write_grid(w, &rep.grid))?;
        report::write_file(dir, "grid.csv", &grid)?;
        let table = report::render(&dir.join("scan.csv"), |w| report::write_scan(w, &scan))?;
        report::write_file(dir, "scan.csv", &table)?;
    }
    Ok(())
}

fn scan(args: &ScanArgs) -> Result<()> {
    let map = rescale(&args.rescale)?;
    let sample: Box<dyn Sample> = if args.density {
        Box::new(read_density(&args.input, map)?)
    } else {
        if map.is_some() {
            return Err(Error::Usage("--rescale applies with --density only".into()));
        }
        Box::new(read_regression(&args.input)?)
    };
    let (_, scan) = fit_adaptive(sample.as_ref())?;
    let table = report::render(Path::new("scan.csv"), |w| report::write_scan(w, &scan))?;
    emit(args.out.as_deref(), "scan.csv", &table)
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut cfg = CampaignConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if args.check && cfg.acceptance.is_none() {
        return Err(Error::Config("--check needs an [acceptance] section in the config".into()));
    }
    let campaign = run_campaign(&cfg)?;
    let summary = campaign.summary();
    if let Some(dir) = args.out.as_deref() {
        let trials = report::render(&dir.join("trials.csv"), |w| report::write_trials(w, &campaign.records))?;
        report::write_file(dir, "trials.csv", &trials)?;
    }
    emit(args.out.as_deref(), "summary.json", report::to_json(&summary)?.as_bytes())?;
    if args.check {
        for c in &summary.checks {
            eprintln!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let failed: Vec<&str> = summary.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        if !failed.is_empty() {
            return Err(Error::CheckFailed(failed.join(", ")));
        }
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::FitReg(a) => fit(a, false),
        Command::FitDen(a) => fit(a, true),
        Command::Scan(a) => scan(a),
        Command::Simulate(a) => simulate(a),
    }
}
