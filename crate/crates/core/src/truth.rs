//! Ground-truth functions specified in coefficient space.
//!
//! A model fixes the residual energy `rho(N) = sum_{j>N} c_j^2` in closed form and
//! sets `c_k^2 = rho(k - 1) - rho(k)`, so the tail beyond the stored
//! coefficients is known exactly and integrated squared errors can be computed
//! by Parseval without truncation bias.
//!
//! * `W(C, alpha, beta)`: `rho(N) = C (N + 1)^{-2 beta} ln(N + e)^alpha`, the
//!   shifted form of `C N^{-2 beta} (log N)^alpha` that is finite at `N = 0`;
//!   `rho(2N)/rho(N) -> 2^{-2 beta}`.
//! * `Z(alpha, beta)`: `rho(N) = alpha beta^N`; `rho(2N)/rho(N) -> 0`.
//!
//! Generated classes use `c_0 = 1/sqrt(2)` (mean level 1/2, the uniform density).
//! Signs follow `+ - - + + - - ...` in `k >= 1`. Plain alternation would make
//! `sum_k |c_k| L_k(-1)` diverge for `beta <= 1`, placing a singularity at the left
//! endpoint of the design.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{E, FRAC_1_SQRT_2};

use crate::estimators::{estimate_coeffs_regression, full_j_max, scan_limit, Problem, RegressionSample};
use crate::legendre::norm_factor;
use crate::quadrature::{gauss_legendre_rule, QuadratureRule};
use crate::sum::{self, Compensated};
use crate::{Error, Result};

/// Smoothness class of a synthetic truth.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassSpec {
    W {
        c: f64,
        alpha: f64,
        beta: f64,
    },
    Z {
        alpha: f64,
        beta: f64,
    },
    /// Finitely supported truth `c_0..=c_J`.
    Explicit(Vec<f64>),
}

impl ClassSpec {
    fn rho(&self, big_n: usize) -> f64 {
        match *self {
            ClassSpec::W { c, alpha, beta } => {
                let nf = big_n as f64;
                let mut v = c * libm::pow(nf + 1.0, -2.0 * beta);
                if alpha != 0.0 {
                    v *= libm::pow(libm::log(nf + E), alpha);
                }
                v
            }
            ClassSpec::Z { alpha, beta } => alpha * libm::pow(beta, big_n as f64),
            ClassSpec::Explicit(ref c) => sum::sum(c.iter().skip(big_n + 1).map(|v| v * v)),
        }
    }

    fn gamma(&self) -> Option<f64> {
        match *self {
            ClassSpec::W { beta, .. } => Some(libm::pow(2.0, -2.0 * beta)),
            ClassSpec::Z { .. } => Some(0.0),
            ClassSpec::Explicit(_) => None,
        }
    }
}

fn sign(k: usize) -> f64 {
    if (k / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticModel {
    class: ClassSpec,
    coeffs: Vec<f64>,
    /// `c_j sqrt(j + 1/2)`, the weights of `P_j`.
    p_weights: Vec<f64>,
    /// Factor applied to every non-constant coefficient.
    shrink: f64,
}

impl SyntheticModel {
    fn from_coeffs(class: ClassSpec, coeffs: Vec<f64>, shrink: f64) -> Self {
        let p_weights = coeffs.iter().enumerate().map(|(j, c)| c * norm_factor(j)).collect();
        SyntheticModel { class, coeffs, p_weights, shrink }
    }

    pub fn class(&self) -> &ClassSpec {
        &self.class
    }

    /// `c_0..=c_J`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn j(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn shrink(&self) -> f64 {
        self.shrink
    }

    /// `lim rho(2N)/rho(N)`: `2^{-2 beta}` for W, 0 for Z, unknown for explicit truths.
    pub fn gamma_true(&self) -> Option<f64> {
        self.class.gamma()
    }

    /// Residual energy `rho(N)` from the closed form.
    pub fn rho(&self, big_n: usize) -> f64 {
        self.shrink * self.shrink * self.class.rho(big_n)
    }

    /// Energy beyond the stored coefficients, `rho(J)`.
    pub fn tail(&self) -> f64 {
        self.rho(self.j())
    }

    /// `c_k` for any `k`, zero beyond `J` for explicit truths; for generated
    /// classes coefficients past `J` follow the same closed form.
    pub fn coeff(&self, k: usize) -> f64 {
        if let Some(c) = self.coeffs.get(k) {
            return *c;
        }
        match self.class {
            ClassSpec::Explicit(_) => 0.0,
            _ => self.shrink * sign(k) * libm::sqrt((self.class.rho(k - 1) - self.class.rho(k)).max(0.0)),
        }
    }

    /// `f(x) = sum_{j<=J} c_j L_j(x)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let mut acc = Compensated::new();
        let mut prev = 0.0;
        let mut cur = 1.0;
        for (j, w) in self.p_weights.iter().enumerate() {
            acc.add(w * cur);
            let jf = j as f64;
            let next = ((2.0 * jf + 1.0) * x * cur - jf * prev) / (jf + 1.0);
            prev = cur;
            cur = next;
        }
        acc.value()
    }

    /// `f(x_i)` on the regression design `x_i = -1 + 2i/n`.
    pub fn design_values(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| self.evaluate(crate::estimators::design_point(n, i))).collect()
    }

    /// Minimum of `f` over `points` equispaced interior grid points.
    pub fn grid_min(&self, points: usize) -> (f64, f64) {
        grid(points)
            .map(|x| (x, self.evaluate(x)))
            .fold((0.0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }

    pub fn grid_max(&self, points: usize) -> f64 {
        grid(points).map(|x| self.evaluate(x)).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `points` equispaced abscissae on `[-1, 1]`, endpoints included.
pub fn grid(points: usize) -> impl Iterator<Item = f64> {
    let denom = (points.max(2) - 1) as f64;
    (0..points).map(move |i| -1.0 + 2.0 * i as f64 / denom)
}

/// Builds a truth with `J` stored coefficients.
pub fn make_truth(spec: &ClassSpec, j: usize, problem: Problem) -> Result<SyntheticModel> {
    match *spec {
        ClassSpec::W { c, alpha, beta } => {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidParameter("W class needs C > 0"));
            }
            if !(beta > 0.0 && beta.is_finite()) || !alpha.is_finite() {
                return Err(Error::InvalidParameter("W class needs beta > 0 and finite alpha"));
            }
            if problem == Problem::Regression && beta <= 0.5 {
                return Err(Error::RoughRegressionTruth { beta });
            }
        }
        ClassSpec::Z { alpha, beta } => {
            if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta < 1.0) {
                return Err(Error::InvalidParameter("Z class needs alpha > 0 and beta in (0, 1)"));
            }
        }
        ClassSpec::Explicit(ref c) => {
            if c.is_empty() {
                return Err(Error::InvalidParameter("explicit truth needs at least c_0"));
            }
            if let Some(index) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index });
            }
            let mut coeffs = c.clone();
            coeffs.resize(coeffs.len().max(j + 1), 0.0);
            return Ok(SyntheticModel::from_coeffs(spec.clone(), coeffs, 1.0));
        }
    }
    let mut coeffs = vec![FRAC_1_SQRT_2; j + 1];
    let mut prev = spec.rho(0);
    for (k, slot) in coeffs.iter_mut().enumerate().skip(1) {
        let cur = spec.rho(k);
        let energy = prev - cur;
        if energy.is_nan() || energy < 0.0 {
            return Err(Error::IncreasingResidual { index: k });
        }
        *slot = sign(k) * libm::sqrt(energy);
        prev = cur;
    }
    Ok(SyntheticModel::from_coeffs(spec.clone(), coeffs, 1.0))
}

/// Grid points used to certify density truths.
pub const DENSITY_GRID: usize = 10_000;
/// Minimum grid value a shrunk density truth keeps.
pub const DENSITY_FLOOR: f64 = 0.01;

/// Turns a truth into a valid density on `[-1, 1]`: `c_0 = 1/sqrt(2)` and the
/// non-constant coefficients shrunk by the largest factor in `(0, 1]` that keeps
/// the grid minimum at least [`DENSITY_FLOOR`].
pub fn make_density_truth(model: &SyntheticModel) -> Result<SyntheticModel> {
    let mut coeffs = model.coeffs.clone();
    coeffs[0] = 0.0;
    let shape = SyntheticModel::from_coeffs(model.class.clone(), coeffs, 1.0);
    let (_, g_min) = shape.grid_min(DENSITY_GRID);
    let level = 0.5;
    let s = if level + g_min >= DENSITY_FLOOR { 1.0 } else { (level - DENSITY_FLOOR) / -g_min };
    let coeffs: Vec<f64> = core::iter::once(FRAC_1_SQRT_2).chain(shape.coeffs[1..].iter().map(|c| s * c)).collect();
    Ok(SyntheticModel::from_coeffs(model.class.clone(), coeffs, s * model.shrink))
}

/// Setting the oracle risk refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiskSetting {
    /// Regression with noise variance `sigma2`.
    Regression { sigma2: f64 },
    /// Density estimation; the noise level is 1.
    Density,
}

/// Bias-variance proxies computable from a known truth, indexed by `N = 1..=n/3`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRisk {
    /// `B(n, N)`; for regression built from the design-averaged coefficients `c_k(n)`.
    pub b: Vec<f64>,
    /// `B(n, N)` with the true coefficients `c_k` in place of `c_k(n)`.
    pub b_true: Vec<f64>,
    /// `A(n, N) = rho(N) + s^2 N / n`.
    pub a: Vec<f64>,
    /// Largest minimiser of `B(n, .)`.
    pub n0: usize,
    pub b_n: f64,
    /// Largest minimiser of `A(n, .)`.
    pub n0_a: usize,
    pub a_n: f64,
    pub sigma2: f64,
    /// Per-coefficient noise level `s^2`: `n` times the variance of each
    /// empirical coefficient. `2 sigma^2` for regression (the `2/n` scaling),
    /// 1 for density estimation.
    pub noise_level: f64,
}

fn largest_argmin(v: &[f64]) -> (usize, f64) {
    let mut best = (1, v[0]);
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x <= best.1 {
            best = (i + 1, x);
        }
    }
    best
}

/// Oracle risk sequences for sample size `n`.
pub fn oracle_risk(truth: &SyntheticModel, setting: RiskSetting, n: usize) -> Result<OracleRisk> {
    oracle_risk_with(truth, setting, n, None)
}

/// As [`oracle_risk`], reusing `f(x_i)` on the regression design when the caller
/// already has it.
pub fn oracle_risk_with(
    truth: &SyntheticModel,
    setting: RiskSetting,
    n: usize,
    design_values: Option<&[f64]>,
) -> Result<OracleRisk> {
    let max_n = scan_limit(n);
    if n < crate::estimators::MIN_SAMPLE {
        return Err(Error::SampleTooSmall { n, min: crate::estimators::MIN_SAMPLE });
    }
    let (sigma2, noise_level) = match setting {
        RiskSetting::Regression { sigma2 } => (sigma2, 2.0 * sigma2),
        RiskSetting::Density => (1.0, 1.0),
    };
    let nf = n as f64;
    let block_true = |big_n: usize| -> f64 {
        match truth.class {
            ClassSpec::Explicit(_) => sum::sum((big_n + 1..=2 * big_n).map(|k| truth.coeff(k) * truth.coeff(k))),
            _ => truth.rho(big_n) - truth.rho(2 * big_n),
        }
    };
    let b_true: Vec<f64> = (1..=max_n).map(|m| block_true(m) + noise_level * m as f64 / nf).collect();
    let b = match setting {
        RiskSetting::Regression { .. } => {
            let values = match design_values {
                Some(v) if v.len() == n => v.to_vec(),
                Some(_) => return Err(Error::InvalidParameter("design values do not match n")),
                None => truth.design_values(n),
            };
            let sample = RegressionSample::new(values)?;
            let cn = estimate_coeffs_regression(&sample, full_j_max(n))?;
            let c = cn.coeffs();
            (1..=max_n)
                .map(|m| sum::sum(c[m + 1..=2 * m].iter().map(|v| v * v)) + noise_level * m as f64 / nf)
                .collect()
        }
        RiskSetting::Density => b_true.clone(),
    };
    let a: Vec<f64> = (1..=max_n).map(|m| truth.rho(m) + noise_level * m as f64 / nf).collect();
    let (n0, b_n) = largest_argmin(&b);
    let (n0_a, a_n) = largest_argmin(&a);
    Ok(OracleRisk { b, b_true, a, n0, b_n, n0_a, a_n, sigma2, noise_level })
}

/// `c_j = int_{-1}^{1} f L_j dx` for `j = 0..=J` by Gauss-Legendre quadrature of
/// order `J + 50`.
pub fn quadrature_coeffs<F: FnMut(f64) -> f64>(f: F, j: usize) -> Result<Vec<f64>> {
    let rule = gauss_legendre_rule(j + 50)?;
    Ok(quadrature_coeffs_with(&rule, f, j))
}

/// As [`quadrature_coeffs`] with a caller-supplied rule.
pub fn quadrature_coeffs_with<F: FnMut(f64) -> f64>(rule: &QuadratureRule, mut f: F, j: usize) -> Vec<f64> {
    let mut acc = vec![Compensated::new(); j + 1];
    let mut row = vec![0.0; j + 1];
    for (x, w) in rule.iter() {
        let fx = w * f(x);
        crate::legendre::legendre_l_row_into(x, &mut row);
        for (a, l) in acc.iter_mut().zip(&row) {
            a.add(fx * l);
        }
    }
    acc.iter().map(Compensated::value).collect()
}
