//! Empirical Fourier-Legendre coefficients, the `tau(n, N)` scan and the
//! projection / adaptive estimators.
//!
//! Regression observes `y_i = f(x_i) + xi_i` on the fixed design
//! `x_i = -1 + 2i/n`, `i = 1..=n`, and estimates
//! `c_j = (2/n) sum_i y_i L_j(x_i)`: a right-endpoint Riemann sum for
//! `int f L_j` on an interval of length 2. Density estimation observes i.i.d.
//! draws on `[-1, 1]` and uses the unbiased `c_j = (1/n) sum_i L_j(xi_i)`.
//!
//! Truncation is chosen by minimising `tau(n, N) = sum_{k=N+1}^{2N} c_k^2`
//! over `N = 1..=n/3`; ties go to the largest `N`.

use alloc::vec;
use alloc::vec::Vec;

use crate::legendre::norm_factor;
use crate::sum::{self, Compensated};
use crate::{Error, Result};

/// Smallest admissible sample size.
pub const MIN_SAMPLE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    Regression,
    Density,
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Regression => "regression",
            Problem::Density => "density",
        }
    }
}

/// Design point `x_i = -1 + 2i/n` (1-based `i`).
#[inline]
pub fn design_point(n: usize, i: usize) -> f64 {
    -1.0 + 2.0 * i as f64 / n as f64
}

/// Largest truncation index scanned, `floor(n/3)`.
#[inline]
pub fn scan_limit(n: usize) -> usize {
    n / 3
}

/// Coefficient count needed by a full scan: indices `0..=2 floor(n/3)`.
#[inline]
pub fn full_j_max(n: usize) -> usize {
    2 * scan_limit(n)
}

/// Regression observations on the implicit uniform design.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSample {
    y: Vec<f64>,
}

impl RegressionSample {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.len() < MIN_SAMPLE {
            return Err(Error::SampleTooSmall { n: y.len(), min: MIN_SAMPLE });
        }
        if let Some(index) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(RegressionSample { y })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// `(x_i, y_i)` pairs in design order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.n();
        self.y.iter().enumerate().map(move |(i, &y)| (design_point(n, i + 1), y))
    }
}

/// I.i.d. draws from a density on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySample {
    xi: Vec<f64>,
}

impl DensitySample {
    pub fn new(xi: Vec<f64>) -> Result<Self> {
        if xi.len() < MIN_SAMPLE {
            return Err(Error::SampleTooSmall { n: xi.len(), min: MIN_SAMPLE });
        }
        for (index, &v) in xi.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::OutOfDomain { index, value: v });
            }
        }
        Ok(DensitySample { xi })
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.xi
    }
}

/// Empirical coefficients `c_0..=c_{j_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    problem: Problem,
    n: usize,
    coeffs: Vec<f64>,
}

impl CoeffTable {
    /// Wraps precomputed coefficients, checking `j_max < n` and `j_max <= 2 floor(n/3)`.
    pub fn from_parts(problem: Problem, n: usize, coeffs: Vec<f64>) -> Result<Self> {
        let Some(j_max) = coeffs.len().checked_sub(1) else {
            return Err(Error::InvalidParameter("coefficient table is empty"));
        };
        check_j_max(n, j_max)?;
        Ok(CoeffTable { problem, n, coeffs })
    }

    pub fn problem(&self) -> Problem {
        self.problem
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

fn check_j_max(n: usize, j_max: usize) -> Result<()> {
    let max = full_j_max(n).min(n.saturating_sub(1));
    if j_max > max || j_max >= n {
        return Err(Error::CoeffRange { requested: j_max, max });
    }
    Ok(())
}

/// Precomputed recurrence factors `P_{k+1} = a_k x P_k - b_k P_{k-1}`.
struct Recurrence {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Recurrence {
    fn new(j_max: usize) -> Self {
        let a = (0..=j_max).map(|k| (2 * k + 1) as f64 / (k + 1) as f64).collect();
        let b = (0..=j_max).map(|k| k as f64 / (k + 1) as f64).collect();
        Recurrence { a, b }
    }
}

/// `sum_i w_i P_j(x_i) / denom * sqrt(j + 1/2)` for `j = 0..=j_max`, every
/// coefficient accumulated over ascending `i` with Kahan compensation.
fn weighted_coefficients<I>(points: I, j_max: usize, denom: f64) -> Vec<f64>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let rec = Recurrence::new(j_max);
    let mut acc = vec![(0.0f64, 0.0f64); j_max + 1];
    for (x, w) in points {
        let mut prev = 0.0;
        let mut cur = w;
        for ((slot, &a), &b) in acc.iter_mut().zip(&rec.a).zip(&rec.b) {
            let (s, c) = slot;
            let y = cur - *c;
            let t = *s + y;
            *c = (t - *s) - y;
            *s = t;
            let next = a * x * cur - b * prev;
            prev = cur;
            cur = next;
        }
    }
    acc.iter().enumerate().map(|(j, &(s, _))| s / denom * norm_factor(j)).collect()
}

/// Regression coefficients `c_j = (2/n) sum_i y_i L_j(x_i)`, `j = 0..=j_max`.
pub fn estimate_coeffs_regression(sample: &RegressionSample, j_max: usize) -> Result<CoeffTable> {
    let n = sample.n();
    check_j_max(n, j_max)?;
    let coeffs = weighted_coefficients(sample.points(), j_max, n as f64 / 2.0);
    Ok(CoeffTable { problem: Problem::Regression, n, coeffs })
}

/// Density coefficients `c_j = (1/n) sum_i L_j(xi_i)`, `j = 0..=j_max`.
pub fn estimate_coeffs_density(sample: &DensitySample, j_max: usize) -> Result<CoeffTable> {
    let n = sample.n();
    check_j_max(n, j_max)?;
    let coeffs = weighted_coefficients(sample.xi.iter().map(|&x| (x, 1.0)), j_max, n as f64);
    Ok(CoeffTable { problem: Problem::Density, n, coeffs })
}

/// `tau(n, N)` for `N = 1..=floor(n/3)` with the selected truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct TauScan {
    n: usize,
    tau: Vec<f64>,
    n_selected: usize,
    tau_star: f64,
}

impl TauScan {
    /// Builds a scan from precomputed values `tau[N - 1]`, selecting the
    /// largest minimiser.
    pub fn from_values(n: usize, tau: Vec<f64>) -> Result<Self> {
        if tau.is_empty() {
            return Err(Error::InvalidParameter("empty tau scan"));
        }
        if let Some(index) = tau.iter().position(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::NonFinite { index });
        }
        let mut n_selected = 1;
        let mut tau_star = tau[0];
        for (i, &t) in tau.iter().enumerate().skip(1) {
            if t <= tau_star {
                tau_star = t;
                n_selected = i + 1;
            }
        }
        Ok(TauScan { n, tau, n_selected, tau_star })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest scanned truncation.
    pub fn max_n(&self) -> usize {
        self.tau.len()
    }

    /// `tau(n, N)` for `1 <= N <= max_n()`.
    pub fn tau(&self, big_n: usize) -> f64 {
        self.tau[big_n - 1]
    }

    pub fn get(&self, big_n: usize) -> Option<f64> {
        big_n.checked_sub(1).and_then(|i| self.tau.get(i)).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.tau
    }

    /// `(N, tau(n, N))` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.tau.iter().enumerate().map(|(i, &t)| (i + 1, t))
    }

    pub fn n_selected(&self) -> usize {
        self.n_selected
    }

    pub fn tau_star(&self) -> f64 {
        self.tau_star
    }
}

/// Block energies `tau(n, N) = sum_{k=N+1}^{2N} c_k^2` over `N = 1..=floor(n/3)`.
pub fn tau_scan(coeffs: &CoeffTable) -> Result<TauScan> {
    let max_n = scan_limit(coeffs.n);
    if max_n == 0 {
        return Err(Error::SampleTooSmall { n: coeffs.n, min: 3 });
    }
    if coeffs.j_max() < 2 * max_n {
        return Err(Error::InsufficientCoefficients { needed: 2 * max_n, available: coeffs.j_max() });
    }
    let c = &coeffs.coeffs;
    let tau = (1..=max_n).map(|big_n| sum::sum(c[big_n + 1..=2 * big_n].iter().map(|v| v * v))).collect();
    TauScan::from_values(coeffs.n, tau)
}

/// Truncated Legendre series `sum_{j=0}^{N} c_j L_j(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveFit {
    problem: Problem,
    n: usize,
    coeffs: Vec<f64>,
    sigma2_hat: Option<f64>,
}

impl AdaptiveFit {
    pub fn problem(&self) -> Problem {
        self.problem
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_selected(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Noise variance estimate, regression only.
    pub fn sigma2_hat(&self) -> Option<f64> {
        self.sigma2_hat
    }

    /// Value of the series at `x` in `[-1, 1]`.
    pub fn evaluate(&self, x: f64) -> f64 {
        debug_assert!((-1.0..=1.0).contains(&x));
        let mut acc = Compensated::new();
        let mut prev = 0.0;
        let mut cur = 1.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            acc.add(c * cur * norm_factor(j));
            let jf = j as f64;
            let next = ((2.0 * jf + 1.0) * x * cur - jf * prev) / (jf + 1.0);
            prev = cur;
            cur = next;
        }
        acc.value()
    }

    /// `int_{-1}^{1}` of the series; only `L_0` contributes.
    pub fn integral(&self) -> f64 {
        self.coeffs[0] * core::f64::consts::SQRT_2
    }
}

/// Projection estimator with a fixed truncation `N`.
pub fn fit_projection(coeffs: &CoeffTable, big_n: usize) -> Result<AdaptiveFit> {
    if big_n > coeffs.j_max() {
        return Err(Error::CoeffRange { requested: big_n, max: coeffs.j_max() });
    }
    Ok(AdaptiveFit { problem: coeffs.problem, n: coeffs.n, coeffs: coeffs.coeffs[..=big_n].to_vec(), sigma2_hat: None })
}

/// Observations that can feed the adaptive pipeline.
pub trait Sample {
    fn problem(&self) -> Problem;
    fn n(&self) -> usize;
    fn coefficients(&self, j_max: usize) -> Result<CoeffTable>;
    fn sigma2_hat(&self) -> Option<f64> {
        None
    }
}

impl Sample for RegressionSample {
    fn problem(&self) -> Problem {
        Problem::Regression
    }
    fn n(&self) -> usize {
        self.n()
    }
    fn coefficients(&self, j_max: usize) -> Result<CoeffTable> {
        estimate_coeffs_regression(self, j_max)
    }
    fn sigma2_hat(&self) -> Option<f64> {
        estimate_sigma2(self).ok()
    }
}

impl Sample for DensitySample {
    fn problem(&self) -> Problem {
        Problem::Density
    }
    fn n(&self) -> usize {
        self.n()
    }
    fn coefficients(&self, j_max: usize) -> Result<CoeffTable> {
        estimate_coeffs_density(self, j_max)
    }
}

/// Adaptive estimator: coefficients up to `2 floor(n/3)`, the scan, then the
/// projection at the selected `N(n)`.
pub fn fit_adaptive<S: Sample + ?Sized>(sample: &S) -> Result<(AdaptiveFit, TauScan)> {
    let table = sample.coefficients(full_j_max(sample.n()))?;
    let scan = tau_scan(&table)?;
    let mut fit = fit_projection(&table, scan.n_selected())?;
    fit.sigma2_hat = sample.sigma2_hat();
    Ok((fit, scan))
}

/// First-difference noise variance estimate
/// `sum_{i=2}^{n} (y_i - y_{i-1})^2 / (2 (n - 1))`.
pub fn estimate_sigma2(sample: &RegressionSample) -> Result<f64> {
    let n = sample.n();
    if n < MIN_SAMPLE + 1 {
        return Err(Error::SampleTooSmall { n, min: MIN_SAMPLE + 1 });
    }
    let ss = sum::sum(sample.y.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])));
    Ok(ss / (2.0 * (n - 1) as f64))
}

/// Integrated squared error against a truth given by coefficients `c_0..=c_J`
/// plus its residual energy `tail = sum_{j>J} c_j^2`, computed in coefficient
/// space by Parseval.
pub fn ise_parseval(fit: &AdaptiveFit, truth: &[f64], tail: f64) -> Result<f64> {
    let n_sel = fit.n_selected();
    if truth.len() <= n_sel {
        return Err(Error::InsufficientCoefficients { needed: n_sel, available: truth.len().saturating_sub(1) });
    }
    let mut acc = Compensated::new();
    for (c_hat, c) in fit.coeffs.iter().zip(truth) {
        acc.add((c_hat - c) * (c_hat - c));
    }
    for c in &truth[n_sel + 1..] {
        acc.add(c * c);
    }
    acc.add(tail);
    Ok(acc.value())
}
