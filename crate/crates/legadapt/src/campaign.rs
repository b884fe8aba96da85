//! Monte Carlo campaigns over an `n` grid.
//!
//! A campaign fixes a truth, a noise law and a list of sample sizes, runs
//! independent trials of the adaptive pipeline for each size and compares the
//! results with oracle quantities computed from the known truth.

use std::path::Path;

use legadapt_core::confidence::{
    calibrate_tail_constant, confidence_report, refined_radius, IntervalKind, TailKind, TailModel,
};
use legadapt_core::estimators::{fit_adaptive, ise_parseval, AdaptiveFit, Problem, TauScan};
use legadapt_core::truth::{
    make_density_truth, make_truth, oracle_risk_with, ClassSpec, OracleRisk, RiskSetting, SyntheticModel,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::simulate::{add_noise, trial_rng, DensitySampler};
use crate::stats::{median, quantile};

pub const THREADS_ENV: &str = "LEGADAPT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemTag {
    Regression,
    Density,
}

impl From<ProblemTag> for Problem {
    fn from(p: ProblemTag) -> Self {
        match p {
            ProblemTag::Regression => Problem::Regression,
            ProblemTag::Density => Problem::Density,
        }
    }
}

/// Truth class; `j` is the number of stored coefficients beyond `c_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", deny_unknown_fields)]
pub enum TruthConfig {
    W {
        c: f64,
        alpha: f64,
        beta: f64,
        j: usize,
    },
    Z {
        alpha: f64,
        beta: f64,
        j: usize,
    },
    #[serde(rename = "explicit")]
    Explicit {
        coeffs: Vec<f64>,
    },
}

impl TruthConfig {
    fn spec(&self) -> (ClassSpec, usize) {
        match *self {
            TruthConfig::W { c, alpha, beta, j } => (ClassSpec::W { c, alpha, beta }, j),
            TruthConfig::Z { alpha, beta, j } => (ClassSpec::Z { alpha, beta }, j),
            TruthConfig::Explicit { ref coeffs } => {
                (ClassSpec::Explicit(coeffs.clone()), coeffs.len().saturating_sub(1))
            }
        }
    }

    /// Builds the truth; density problems get the shrunk, normalised version.
    pub fn build(&self, problem: ProblemTag) -> Result<SyntheticModel> {
        let (spec, j) = self.spec();
        let model = make_truth(&spec, j, problem.into())?;
        match (problem, self) {
            (ProblemTag::Density, TruthConfig::Explicit { .. }) => Ok(model),
            (ProblemTag::Density, _) => Ok(make_density_truth(&model)?),
            (ProblemTag::Regression, _) => Ok(model),
        }
    }
}

/// Settings for the refined interval `tau*/(1 - gamma_hat) + tau* u(delta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfidenceConfig {
    pub delta: f64,
    pub c_tail: f64,
    pub interval: IntervalTag,
}

impl Default for ConfidenceConfig {
    fn default() -> Self {
        ConfidenceConfig { delta: 0.1, c_tail: 1.0, interval: IntervalTag::Adaptive }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalTag {
    Adaptive,
    Crude,
}

impl From<IntervalTag> for IntervalKind {
    fn from(t: IntervalTag) -> Self {
        match t {
            IntervalTag::Adaptive => IntervalKind::Adaptive,
            IntervalTag::Crude => IntervalKind::Crude,
        }
    }
}

/// Pass thresholds evaluated by `--check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceConfig {
    /// Trials (a prefix of the campaign) used by every check except coverage.
    pub subset_trials: usize,
    /// Allowed range of the median-ISE reduction per 4x increase of `n`.
    pub rate_factor: [f64; 2],
    pub adaptivity_max: f64,
    pub tau_consistency_max: f64,
    pub gamma_window: [f64; 2],
    pub coverage_min: f64,
    pub coverage_slack: f64,
    pub ratio_p95_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub problem: ProblemTag,
    pub n: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub truth: TruthConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    #[serde(default)]
    pub confidence: ConfidenceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance: Option<AcceptanceConfig>,
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: CampaignConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() {
            return Err(Error::Config("`n` must list at least one sample size".into()));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < legadapt_core::estimators::MIN_SAMPLE) {
            return Err(Error::Config(format!("sample size {n} in `n` is below 16")));
        }
        if self.trials == 0 {
            return Err(Error::Config("`trials` must be positive".into()));
        }
        match (self.problem, &self.noise) {
            (ProblemTag::Regression, None) => {
                return Err(Error::Config("regression campaigns need a [noise] section".into()))
            }
            (_, Some(noise)) => noise.validate()?,
            _ => {}
        }
        let c = &self.confidence;
        if !(c.delta > 0.0 && c.delta < 1.0) || !(c.c_tail > 0.0 && c.c_tail.is_finite()) {
            return Err(Error::Config("confidence needs delta in (0, 1) and c_tail > 0".into()));
        }
        Ok(())
    }

    fn tail_model(&self) -> Result<TailModel> {
        let (kind, q_scale) = match (self.problem, &self.noise) {
            (ProblemTag::Regression, Some(noise)) => (TailKind::Regression { q: noise.q() }, noise.tail_scale()),
            _ => (TailKind::Density, 1.0),
        };
        Ok(TailModel::new(kind, self.confidence.c_tail, q_scale)?)
    }
}

/// One trial at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub n: usize,
    pub trial: u64,
    pub seed: u64,
    pub ise: f64,
    pub b_n: f64,
    /// `ise / b_n`.
    pub ratio: f64,
    pub n_selected: usize,
    pub n0: usize,
    pub tau_star: f64,
    pub gamma_hat: Option<f64>,
    pub ci_radius: Option<f64>,
    pub degeneracy: Option<String>,
    /// `ise <= ci_radius`; false when the interval is degenerate.
    pub covered: bool,
    pub refined_radius: Option<f64>,
    pub refined_covered: bool,
    pub sigma2_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: u64,
    pub outcome: std::result::Result<TrialReport, String>,
}

/// Stream id of trial `t` at sample size `n`: trials never share randomness and
/// a prefix of a campaign reproduces a shorter campaign exactly.
pub fn stream_id(n: usize, trial: u64) -> u64 {
    ((n as u64) << 32) | trial
}

/// Everything fixed per sample size.
struct SizeContext {
    n: usize,
    oracle: OracleRisk,
    source: Source,
}

enum Source {
    Regression { values: Vec<f64>, noise: NoiseModel },
    Density(DensitySampler),
}

impl SizeContext {
    fn new(cfg: &CampaignConfig, truth: &SyntheticModel, n: usize) -> Result<Self> {
        let (source, setting) = match cfg.problem {
            ProblemTag::Regression => {
                let noise = cfg.noise.expect("validated");
                let values = truth.design_values(n);
                (Source::Regression { values, noise }, RiskSetting::Regression { sigma2: noise.variance() })
            }
            ProblemTag::Density => (Source::Density(DensitySampler::new(truth.clone())?), RiskSetting::Density),
        };
        let design = match &source {
            Source::Regression { values, .. } => Some(values.as_slice()),
            Source::Density(_) => None,
        };
        let oracle = oracle_risk_with(truth, setting, n, design)?;
        Ok(SizeContext { n, oracle, source })
    }

    fn fit(&self, seed: u64, trial: u64) -> Result<(AdaptiveFit, TauScan)> {
        let mut rng = trial_rng(seed, stream_id(self.n, trial));
        match &self.source {
            Source::Regression { values, noise } => {
                let s = add_noise(values, noise, &mut rng)?;
                Ok(fit_adaptive(&s)?)
            }
            Source::Density(sampler) => {
                let s = sampler.sample(self.n, &mut rng)?;
                Ok(fit_adaptive(&s)?)
            }
        }
    }
}

fn run_trial(
    ctx: &SizeContext,
    truth: &SyntheticModel,
    tail: &TailModel,
    cfg: &CampaignConfig,
    seed: u64,
    trial: u64,
) -> Result<TrialReport> {
    let (fit, scan) = ctx.fit(seed, trial)?;
    let ise = ise_parseval(&fit, truth.coeffs(), truth.tail())?;
    let report = confidence_report(&scan);
    let covered = report.radius.is_some_and(|r| ise <= r);
    let refined =
        refined_radius(&report, tail, cfg.confidence.delta, cfg.confidence.interval.into()).ok().map(|r| r.radius);
    let b_n = ctx.oracle.b_n;
    Ok(TrialReport {
        n: ctx.n,
        trial,
        seed,
        ise,
        b_n,
        ratio: ise / b_n,
        n_selected: scan.n_selected(),
        n0: ctx.oracle.n0,
        tau_star: scan.tau_star(),
        gamma_hat: report.gamma_hat,
        ci_radius: report.radius,
        degeneracy: report.degenerate.map(|d| d.to_string()),
        covered,
        refined_radius: refined,
        refined_covered: refined.is_some_and(|r| ise <= r),
        sigma2_hat: fit.sigma2_hat(),
    })
}

/// Rayon pool sized by `LEGADAPT_THREADS` (unset or 0: one thread per core).
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub config: CampaignConfig,
    pub truth: SyntheticModel,
    pub oracles: Vec<OracleRisk>,
    pub records: Vec<TrialRecord>,
}

/// Runs every trial. Invalid configurations fail up front; a failing trial is
/// recorded and the campaign continues.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<Campaign> {
    cfg.validate()?;
    let truth = cfg.truth.build(cfg.problem)?;
    let tail = cfg.tail_model()?;
    let pool = thread_pool()?;
    let mut records = Vec::with_capacity(cfg.n.len() * cfg.trials);
    let mut oracles = Vec::with_capacity(cfg.n.len());
    for &n in &cfg.n {
        let ctx = SizeContext::new(cfg, &truth, n)?;
        let batch: Vec<TrialRecord> = pool.install(|| {
            (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| TrialRecord {
                    n,
                    trial: t,
                    outcome: run_trial(&ctx, &truth, &tail, cfg, cfg.seed, t).map_err(|e| e.to_string()),
                })
                .collect()
        });
        records.extend(batch);
        oracles.push(ctx.oracle);
    }
    Ok(Campaign { config: cfg.clone(), truth, oracles, records })
}

/// Empirical `C_tail` for the refined interval at sample size `n`: runs
/// `trials` calibration trials and matches `u(delta)` to the `1 - delta`
/// quantile of the normalised excess error.
pub fn calibrate_c_tail(cfg: &CampaignConfig, n: usize, trials: usize) -> Result<f64> {
    let mut cal = cfg.clone();
    cal.n = vec![n];
    cal.trials = trials;
    let campaign = run_campaign(&cal)?;
    let kind: IntervalKind = cfg.confidence.interval.into();
    let excess: Vec<f64> = campaign
        .reports()
        .map(|r| match kind {
            IntervalKind::Crude => r.ise / r.tau_star,
            IntervalKind::Adaptive => match r.ci_radius {
                Some(radius) => ((r.ise - radius) / r.tau_star).max(f64::MIN_POSITIVE),
                None => f64::INFINITY,
            },
        })
        .collect();
    let r = cal.tail_model()?.r;
    Ok(calibrate_tail_constant(&excess, cfg.confidence.delta, r)?)
}

impl Campaign {
    pub fn reports(&self) -> impl Iterator<Item = &TrialReport> {
        self.records.iter().filter_map(|r| r.outcome.as_ref().ok())
    }

    pub fn summary(&self) -> Summary {
        let per_n = self.size_summaries(None);
        let subset = self
            .config
            .acceptance
            .as_ref()
            .filter(|a| a.subset_trials < self.config.trials)
            .map(|a| self.size_summaries(Some(a.subset_trials)));
        let basis = subset.as_ref().unwrap_or(&per_n);
        let monotone = Monotonicity::from_sizes(basis);
        let checks = self.config.acceptance.as_ref().map(|a| evaluate_checks(basis, &per_n, a)).unwrap_or_default();
        Summary {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: self.config.clone(),
            gamma_true: self.truth.gamma_true(),
            truth_shrink: self.truth.shrink(),
            per_n,
            subset,
            monotone,
            checks,
        }
    }

    fn size_summaries(&self, limit: Option<usize>) -> Vec<SizeSummary> {
        self.config
            .n
            .iter()
            .zip(&self.oracles)
            .map(|(&n, oracle)| {
                let records: Vec<&TrialRecord> =
                    self.records.iter().filter(|r| r.n == n && limit.is_none_or(|l| (r.trial as usize) < l)).collect();
                SizeSummary::from_records(n, oracle, &records)
            })
            .collect()
    }
}

/// Five-point quantile summary (linear interpolation between order statistics).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p05: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
}

impl Quantiles {
    fn of(sorted: &[f64]) -> Self {
        Quantiles {
            p05: quantile(sorted, 0.05),
            p25: quantile(sorted, 0.25),
            p50: quantile(sorted, 0.5),
            p75: quantile(sorted, 0.75),
            p95: quantile(sorted, 0.95),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub trials: usize,
    pub failures: usize,
    pub n0: usize,
    pub b_n: f64,
    pub a_n: f64,
    pub ise: Quantiles,
    pub ratio: Quantiles,
    pub median_n_selected: f64,
    /// Median of `|N(n)/N0(n) - 1|`.
    pub median_n_ratio_error: f64,
    /// Median of `|tau*(n)/B(n) - 1|`.
    pub median_tau_ratio_error: f64,
    /// Median of the raw `gamma_hat` over trials where it is defined.
    pub median_gamma_hat: Option<f64>,
    pub gamma_defined: usize,
    pub degenerate_fraction: f64,
    pub coverage: f64,
    pub refined_coverage: f64,
}

impl SizeSummary {
    fn from_records(n: usize, oracle: &OracleRisk, records: &[&TrialRecord]) -> Self {
        let ok: Vec<&TrialReport> = records.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
        let count = ok.len();
        let sorted = |f: &dyn Fn(&TrialReport) -> Option<f64>| -> Vec<f64> {
            let mut v: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let frac = |f: &dyn Fn(&TrialReport) -> bool| -> f64 {
            if records.is_empty() {
                f64::NAN
            } else {
                ok.iter().filter(|r| f(r)).count() as f64 / records.len() as f64
            }
        };
        let ise = sorted(&|r| Some(r.ise));
        let ratio = sorted(&|r| Some(r.ratio));
        let gamma = sorted(&|r| r.gamma_hat);
        SizeSummary {
            n,
            trials: records.len(),
            failures: records.len() - count,
            n0: oracle.n0,
            b_n: oracle.b_n,
            a_n: oracle.a_n,
            ise: Quantiles::of(&ise),
            ratio: Quantiles::of(&ratio),
            median_n_selected: median(&sorted(&|r| Some(r.n_selected as f64))),
            median_n_ratio_error: median(&sorted(&|r| Some((r.n_selected as f64 / r.n0 as f64 - 1.0).abs()))),
            median_tau_ratio_error: median(&sorted(&|r| Some((r.tau_star / r.b_n - 1.0).abs()))),
            median_gamma_hat: (!gamma.is_empty()).then(|| median(&gamma)),
            gamma_defined: gamma.len(),
            degenerate_fraction: frac(&|r| r.degeneracy.is_some()),
            // Failed trials count as not covered.
            coverage: frac(&|r| r.covered),
            refined_coverage: frac(&|r| r.refined_covered),
        }
    }
}

/// Trends across the `n` grid (ascending order of the configured list).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monotonicity {
    pub ise_decreasing: bool,
    pub n_ratio_error_nonincreasing: bool,
    pub tau_ratio_error_nonincreasing: bool,
    pub ratio_p95_nonincreasing: bool,
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

impl Monotonicity {
    fn from_sizes(s: &[SizeSummary]) -> Self {
        let col = |f: fn(&SizeSummary) -> f64| s.iter().map(f).collect::<Vec<_>>();
        let ise = col(|x| x.ise.p50);
        Monotonicity {
            ise_decreasing: ise.windows(2).all(|w| w[1] < w[0]),
            n_ratio_error_nonincreasing: nonincreasing(&col(|x| x.median_n_ratio_error)),
            tau_ratio_error_nonincreasing: nonincreasing(&col(|x| x.median_tau_ratio_error)),
            ratio_p95_nonincreasing: nonincreasing(&col(|x| x.ratio.p95)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name: name.to_string(), pass, detail }
}

/// Median-ISE reduction between consecutive sizes, normalised to a 4x step.
pub fn rate_factors(s: &[SizeSummary]) -> Vec<f64> {
    s.windows(2)
        .map(|w| {
            let step = (w[1].n as f64 / w[0].n as f64).ln() / 4f64.ln();
            (w[0].ise.p50 / w[1].ise.p50).powf(1.0 / step)
        })
        .collect()
}

/// Evaluates the configured thresholds. `basis` holds the trial prefix used by
/// all checks but coverage, which uses `full`.
pub fn evaluate_checks(basis: &[SizeSummary], full: &[SizeSummary], a: &AcceptanceConfig) -> Vec<CheckOutcome> {
    let first = &basis[0];
    let last = &basis[basis.len() - 1];
    let mut out = Vec::new();

    let factors = rate_factors(basis);
    let rate_ok = factors.iter().all(|f| (a.rate_factor[0]..=a.rate_factor[1]).contains(f));
    out.push(check("rate", rate_ok, format!("median ISE reduction per 4x n: {factors:?}")));

    let nerr: Vec<f64> = basis.iter().map(|s| s.median_n_ratio_error).collect();
    let adapt_ok = nonincreasing(&nerr) && last.median_n_ratio_error <= a.adaptivity_max;
    out.push(check("adaptivity", adapt_ok, format!("median |N/N0 - 1|: {nerr:?}")));

    let terr: Vec<f64> = basis.iter().map(|s| s.median_tau_ratio_error).collect();
    let tau_ok = last.median_tau_ratio_error <= first.median_tau_ratio_error
        && last.median_tau_ratio_error <= a.tau_consistency_max;
    out.push(check("tau_consistency", tau_ok, format!("median |tau*/B - 1|: {terr:?}")));

    let g = last.median_gamma_hat;
    let gamma_ok = g.is_some_and(|g| (a.gamma_window[0]..=a.gamma_window[1]).contains(&g));
    out.push(check("gamma", gamma_ok, format!("median gamma_hat at n = {}: {g:?}", last.n)));

    let cov: Vec<f64> = full.iter().map(|s| s.coverage).collect();
    let (c_first, c_last) = (cov[0], cov[cov.len() - 1]);
    let cov_ok = c_last >= a.coverage_min && c_last >= c_first - a.coverage_slack;
    out.push(check("coverage", cov_ok, format!("coverage: {cov:?}")));

    let p95: Vec<f64> = basis.iter().map(|s| s.ratio.p95).collect();
    let ratio_ok = p95.iter().all(|&p| p <= a.ratio_p95_max) && p95[p95.len() - 1] <= p95[0];
    out.push(check("ratio_p95", ratio_ok, format!("95th percentile of ISE/B: {p95:?}")));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub tool_version: String,
    pub config: CampaignConfig,
    pub gamma_true: Option<f64>,
    pub truth_shrink: f64,
    pub per_n: Vec<SizeSummary>,
    /// Statistics over the first `acceptance.subset_trials` trials.
    pub subset: Option<Vec<SizeSummary>>,
    pub monotone: Monotonicity,
    pub checks: Vec<CheckOutcome>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}
