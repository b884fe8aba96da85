//! Noise laws with sub-Weibull tails `P(|xi| > x) <= exp(-(x/Q)^q)`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// `q = 2`, `Q = sigma sqrt(2)`.
    Gaussian,
    /// Symmetric exponential with scale `b = sigma / sqrt(2)`; `q = 1`, `Q = b`.
    Laplace,
    /// Uniform on `[-a, a]`, `a = sigma sqrt(3)`; `q = 2`, `Q = a`.
    Uniform,
}

/// Centred noise with standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub sigma: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, sigma: f64) -> Result<Self> {
        let m = NoiseModel { kind, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("noise sigma must be finite and >= 0, got {}", self.sigma)));
        }
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// Tail exponent `q`.
    pub fn q(&self) -> f64 {
        match self.kind {
            NoiseKind::Gaussian | NoiseKind::Uniform => 2.0,
            NoiseKind::Laplace => 1.0,
        }
    }

    /// Tail scale `Q`.
    pub fn tail_scale(&self) -> f64 {
        match self.kind {
            NoiseKind::Gaussian => self.sigma * std::f64::consts::SQRT_2,
            NoiseKind::Laplace => self.sigma / std::f64::consts::SQRT_2,
            NoiseKind::Uniform => self.sigma * 3f64.sqrt(),
        }
    }

    /// `exp(-(x/Q)^q)`.
    pub fn tail_bound(&self, x: f64) -> f64 {
        (-(x / self.tail_scale()).powf(self.q())).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            NoiseKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                self.sigma * z
            }
            NoiseKind::Laplace => {
                let e: f64 = Exp1.sample(rng);
                let b = self.sigma / std::f64::consts::SQRT_2;
                if rng.random::<bool>() {
                    b * e
                } else {
                    -b * e
                }
            }
            NoiseKind::Uniform => {
                let a = self.sigma * 3f64.sqrt();
                a * (2.0 * rng.random::<f64>() - 1.0)
            }
        }
    }
}
