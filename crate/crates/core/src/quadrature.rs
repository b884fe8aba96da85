//! Gauss-Legendre quadrature on `[-1, 1]`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::sum::Compensated;
use crate::{Error, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Nodes and weights of an `order`-point Gauss-Legendre rule.
///
/// Exact for polynomials of degree up to `2 * order - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Strictly increasing nodes in `(-1, 1)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).collect::<Compensated>().value()
    }
}

// P_m(x) and P'_m(x) for Newton steps on interior points.
fn p_and_deriv(m: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = x;
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    let d = m as f64 * (x * cur - prev) / (x * x - 1.0);
    (cur, d)
}

/// Builds the `order`-point rule by Newton iteration from Chebyshev-type
/// initial guesses `cos(pi (i - 1/4) / (order + 1/2))`.
pub fn gauss_legendre_rule(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidParameter("quadrature order must be positive"));
    }
    if order == 1 {
        return Ok(QuadratureRule { nodes: vec![0.0], weights: vec![2.0] });
    }
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let half = order.div_ceil(2);
    let m = order as f64;
    for i in 0..half {
        // Roots in decreasing order: the i-th largest.
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (m + 0.5));
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = p_and_deriv(order, x);
            let dx = p / d;
            x -= dx;
            if libm::fabs(dx) <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::QuadratureDiverged { order, node: i });
        }
        if order % 2 == 1 && i == half - 1 {
            x = 0.0;
        }
        let (_, d) = p_and_deriv(order, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[order - 1 - i] = x;
        weights[order - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    Ok(QuadratureRule { nodes, weights })
}
