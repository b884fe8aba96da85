//! Synthetic samples from a known truth.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit seed with a separate
//! stream id, so trial `t` draws the same numbers whether it runs alone, first,
//! or on another thread.

use std::f64::consts::FRAC_1_SQRT_2;

use legadapt_core::estimators::{DensitySample, RegressionSample};
use legadapt_core::truth::{SyntheticModel, DENSITY_GRID};
use legadapt_core::Error as CoreError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::noise::NoiseModel;

/// Envelope head-room over the grid maximum.
pub const ENVELOPE_MARGIN: f64 = 1e-3;
/// Smallest acceptable rejection-sampling acceptance rate.
pub const MIN_ACCEPTANCE: f64 = 0.01;

pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `y_i = f(x_i) + xi_i` on the design `x_i = -1 + 2i/n`.
pub fn simulate_regression(
    truth: &SyntheticModel,
    noise: &NoiseModel,
    n: usize,
    seed: u64,
) -> Result<RegressionSample> {
    let values = truth.design_values(n);
    add_noise(&values, noise, &mut trial_rng(seed, 0))
}

/// Adds i.i.d. noise to precomputed `f(x_i)`.
pub fn add_noise<R: Rng + ?Sized>(values: &[f64], noise: &NoiseModel, rng: &mut R) -> Result<RegressionSample> {
    let y = values.iter().map(|f| f + noise.sample(rng)).collect();
    Ok(RegressionSample::new(y)?)
}

/// Rejection sampler with a uniform proposal on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct DensitySampler {
    truth: SyntheticModel,
    bound: f64,
}

impl DensitySampler {
    /// Checks normalisation and non-negativity on a grid of [`DENSITY_GRID`]
    /// points and sets the envelope to the grid maximum times `1 + 1e-3`.
    pub fn new(truth: SyntheticModel) -> Result<Self> {
        if (truth.coeffs()[0] - FRAC_1_SQRT_2).abs() > 1e-12 {
            return Err(Error::Data(format!("density truth needs c_0 = 1/sqrt(2), got {}", truth.coeffs()[0])));
        }
        let (x, min) = truth.grid_min(DENSITY_GRID);
        if min < 0.0 {
            return Err(CoreError::InvalidDensity { x, value: min }.into());
        }
        let bound = truth.grid_max(DENSITY_GRID) * (1.0 + ENVELOPE_MARGIN);
        let sampler = DensitySampler { truth, bound };
        if sampler.acceptance_rate() < MIN_ACCEPTANCE {
            return Err(Error::Envelope { acceptance: sampler.acceptance_rate() });
        }
        Ok(sampler)
    }

    pub fn truth(&self) -> &SyntheticModel {
        &self.truth
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Expected fraction of accepted proposals, `1 / (2 bound)`.
    pub fn acceptance_rate(&self) -> f64 {
        1.0 / (2.0 * self.bound)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = 2.0 * rng.random::<f64>() - 1.0;
            let u = self.bound * rng.random::<f64>();
            if u < self.truth.evaluate(x) {
                return x;
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DensitySample> {
        let xi = (0..n).map(|_| self.draw(rng)).collect();
        Ok(DensitySample::new(xi)?)
    }
}

/// `n` i.i.d. draws from the density `truth`.
pub fn simulate_density(truth: &SyntheticModel, n: usize, seed: u64) -> Result<DensitySample> {
    DensitySampler::new(truth.clone())?.sample(n, &mut trial_rng(seed, 0))
}
