//! Adaptive confidence bounds for the integrated squared error.
//!
//! With block size `M = floor(exp(sqrt(ln n)))`, the block energies
//! `tau(M)`, `tau(2M)`, `tau(4M)` each carry a noise floor proportional to the
//! block length, and a residual part decaying by the factor `gamma` per doubling.
//! Eliminating both gives
//!
//! ```text
//! gamma_hat = (tau(4M) - 2 tau(2M)) / (tau(2M) - 2 tau(M))
//! ```
//!
//! and the bound `||f_hat - f||^2 <= tau* (tau(2M) - 2 tau(M)) / (3 tau(2M) - 2 tau(M) - tau(4M))`,
//! which is algebraically `tau* / (1 - gamma_hat)`.

use alloc::vec::Vec;

use crate::estimators::{scan_limit, TauScan};
use crate::{Degeneracy, Error, Result};

/// Accepted window for `gamma_hat`; outside it no interval is reported.
pub const GAMMA_WINDOW: (f64, f64) = (0.001, 0.95);

/// Block size with a record of whether it had to be shrunk to fit the scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSize {
    /// Usable block size; zero when none exists.
    pub m: usize,
    /// `floor(exp(sqrt(ln n)))` before clamping.
    pub raw: usize,
    pub clamped: bool,
}

impl BlockSize {
    /// A caller-chosen block size, not clamped.
    pub fn exact(m: usize) -> Self {
        BlockSize { m, raw: m, clamped: false }
    }
}

/// `M(n) = floor(exp(sqrt(ln n)))`, clamped so that `4M <= floor(n/3)`.
pub fn block_size(n: usize) -> BlockSize {
    let raw = if n < 2 { 1 } else { libm::floor(libm::exp(libm::sqrt(libm::log(n as f64)))) as usize };
    let limit = scan_limit(n) / 4;
    let m = raw.min(limit);
    BlockSize { m, raw, clamped: m != raw }
}

fn block_values(scan: &TauScan, m: usize) -> core::result::Result<(f64, f64, f64), Degeneracy> {
    if m == 0 || 4 * m > scan.max_n() {
        return Err(Degeneracy::NoBlock);
    }
    Ok((scan.tau(m), scan.tau(2 * m), scan.tau(4 * m)))
}

/// Unchecked `(tau(4M) - 2 tau(2M)) / (tau(2M) - 2 tau(M))`; `None` when the
/// denominator vanishes to within rounding.
fn raw_gamma(t1: f64, t2: f64, t4: f64) -> Option<f64> {
    let den = t2 - 2.0 * t1;
    let scale = t2 + 2.0 * t1;
    if den == 0.0 || libm::fabs(den) <= 64.0 * f64::EPSILON * scale {
        return None;
    }
    Some((t4 - 2.0 * t2) / den)
}

/// Consistent estimate of the residual decay ratio `gamma`.
///
/// Values outside [`GAMMA_WINDOW`] are returned as
/// [`Degeneracy::GammaOutOfRange`] carrying the raw value.
pub fn gamma_hat(scan: &TauScan, m: usize) -> core::result::Result<f64, Degeneracy> {
    let (t1, t2, t4) = block_values(scan, m)?;
    let g = raw_gamma(t1, t2, t4).ok_or(Degeneracy::VanishingDenominator)?;
    if g > GAMMA_WINDOW.0 && g < GAMMA_WINDOW.1 {
        Ok(g)
    } else {
        Err(Degeneracy::GammaOutOfRange(g))
    }
}

/// Interval variants sharing one code path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalKind {
    /// `tau* / (1 - gamma_hat) + tau* u(delta)`.
    Adaptive,
    /// `tau* u(delta)`, no `gamma` term.
    Crude,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedRadius {
    pub kind: IntervalKind,
    pub delta: f64,
    pub u_delta: f64,
    pub radius: f64,
}

/// Block statistics, `gamma_hat` and the resulting bound on `||f_hat - f||^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceReport {
    pub n: usize,
    pub block: BlockSize,
    /// `(tau(M), tau(2M), tau(4M))` when the blocks fit in the scan.
    pub blocks: Option<(f64, f64, f64)>,
    /// Raw estimate, reported even when out of range.
    pub gamma_hat: Option<f64>,
    pub tau_star: f64,
    pub radius: Option<f64>,
    pub degenerate: Option<Degeneracy>,
    pub refined: Option<RefinedRadius>,
}

impl ConfidenceReport {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate.is_some()
    }
}

/// Adaptive confidence radius from the scan at block size `block.m`.
pub fn aci_radius(scan: &TauScan, block: BlockSize) -> ConfidenceReport {
    let mut report = ConfidenceReport {
        n: scan.n(),
        block,
        blocks: None,
        gamma_hat: None,
        tau_star: scan.tau_star(),
        radius: None,
        degenerate: None,
        refined: None,
    };
    let (t1, t2, t4) = match block_values(scan, block.m) {
        Ok(v) => v,
        Err(d) => {
            report.degenerate = Some(d);
            return report;
        }
    };
    report.blocks = Some((t1, t2, t4));
    report.gamma_hat = raw_gamma(t1, t2, t4);
    let g = match gamma_hat(scan, block.m) {
        Ok(g) => g,
        Err(d) => {
            report.degenerate = Some(d);
            return report;
        }
    };
    let ratio = (t2 - 2.0 * t1) / (3.0 * t2 - 2.0 * t1 - t4);
    if !(ratio.is_finite() && ratio > 0.0) {
        report.degenerate = Some(Degeneracy::GammaOutOfRange(g));
        return report;
    }
    let radius = report.tau_star * ratio;
    debug_assert!(libm::fabs(radius * (1.0 - g) - report.tau_star) <= 1e-10 * report.tau_star);
    report.radius = Some(radius);
    report
}

/// Block size from `n`, then [`aci_radius`].
pub fn confidence_report(scan: &TauScan) -> ConfidenceReport {
    aci_radius(scan, block_size(scan.n()))
}

/// Which tail condition governs the deviation exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailKind {
    /// Regression noise with `P(|xi| > x) <= exp(-(x/Q)^q)`.
    Regression {
        q: f64,
    },
    Density,
}

/// Exponent `r`: `2q/(q + 4)` for `q < 2`, `q/(q + 1)` for `q >= 2`, and 1 for
/// density estimation.
pub fn tail_exponent(kind: TailKind) -> f64 {
    match kind {
        TailKind::Density => 1.0,
        TailKind::Regression { q } if q < 2.0 => 2.0 * q / (q + 4.0),
        TailKind::Regression { q } => q / (q + 1.0),
    }
}

/// Tail constants for the refined interval. `c_tail` has no closed form and is
/// supplied by configuration or by [`calibrate_tail_constant`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub kind: TailKind,
    pub r: f64,
    pub c_tail: f64,
    /// Noise scale `Q`, kept for reporting.
    pub q_scale: f64,
}

impl TailModel {
    pub fn new(kind: TailKind, c_tail: f64, q_scale: f64) -> Result<Self> {
        if let TailKind::Regression { q } = kind {
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::InvalidParameter("tail exponent q must be positive"));
            }
        }
        Self::with_exponent(kind, tail_exponent(kind), c_tail, q_scale)
    }

    /// Overrides the derived exponent.
    pub fn with_exponent(kind: TailKind, r: f64, c_tail: f64, q_scale: f64) -> Result<Self> {
        if !(c_tail > 0.0 && c_tail.is_finite()) {
            return Err(Error::InvalidParameter("c_tail must be positive"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter("tail exponent r must be positive"));
        }
        Ok(TailModel { kind, r, c_tail, q_scale })
    }

    /// Solves `2 exp(-c_tail u^{r/2}) = delta`: `u = (ln(2/delta)/c_tail)^{2/r}`.
    pub fn u(&self, delta: f64) -> f64 {
        libm::pow(libm::log(2.0 / delta) / self.c_tail, 2.0 / self.r)
    }
}

/// Confidence radius with reliability about `1 - delta`.
pub fn refined_radius(
    report: &ConfidenceReport,
    tail: &TailModel,
    delta: f64,
    kind: IntervalKind,
) -> Result<RefinedRadius> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter("delta must lie in (0, 1)"));
    }
    let u_delta = tail.u(delta);
    let tau_star = report.tau_star;
    let radius = match kind {
        IntervalKind::Crude => tau_star * u_delta,
        IntervalKind::Adaptive => {
            if let Some(d) = report.degenerate {
                return Err(Error::Degenerate(d));
            }
            let base = report.radius.ok_or(Error::Degenerate(Degeneracy::NoBlock))?;
            base + tau_star * u_delta
        }
    };
    Ok(RefinedRadius { kind, delta, u_delta, radius })
}

/// Fits `c_tail` so that `u(delta)` equals the empirical `1 - delta` quantile
/// of the excess ratios, i.e. the part of `||f_hat - f||^2 / tau*` not already
/// covered by the base interval (the whole ratio for [`IntervalKind::Crude`]).
pub fn calibrate_tail_constant(excess: &[f64], delta: f64, r: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter("delta must lie in (0, 1)"));
    }
    let mut v: Vec<f64> = excess.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return Err(Error::InvalidParameter("no finite calibration values"));
    }
    v.sort_by(f64::total_cmp);
    let rank = libm::ceil((1.0 - delta) * v.len() as f64) as usize;
    let q = v[rank.clamp(1, v.len()) - 1];
    if q.is_nan() || q <= 0.0 {
        return Err(Error::InvalidParameter("calibration quantile is not positive"));
    }
    Ok(libm::log(2.0 / delta) / libm::pow(q, r / 2.0))
}
