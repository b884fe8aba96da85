//! Legendre polynomials, the orthonormal basis `L_k` and Christoffel-Darboux kernels.
//!
//! Everything is evaluated with the forward three-term recurrence
//!
//! ```text
//! (k + 1) P_{k+1}(x) = (2k + 1) x P_k(x) - k P_{k-1}(x),   P_0 = 1, P_1 = x
//! ```
//!
//! which is stable on `[-1, 1]` and costs `O(k)` per point. The orthonormal basis
//! is `L_k = P_k * sqrt(k + 1/2)`, so that `int_{-1}^{1} L_j L_k dx = delta_{jk}`.

use alloc::vec;
use alloc::vec::Vec;

/// Abscissa on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EvalPoint(f64);

impl EvalPoint {
    pub fn new(x: f64) -> Option<Self> {
        (-1.0..=1.0).contains(&x).then_some(EvalPoint(x))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `k` equispaced points from -1 to 1 inclusive (`k >= 2`), or the midpoint for `k = 1`.
    pub fn grid(k: usize) -> impl Iterator<Item = EvalPoint> {
        (0..k).map(move |i| {
            if k == 1 {
                EvalPoint(0.0)
            } else {
                EvalPoint((-1.0 + 2.0 * i as f64 / (k - 1) as f64).clamp(-1.0, 1.0))
            }
        })
    }
}

impl From<EvalPoint> for f64 {
    fn from(p: EvalPoint) -> f64 {
        p.0
    }
}

/// Normalising factor `sqrt(k + 1/2)` turning `P_k` into `L_k`.
#[inline]
pub fn norm_factor(k: usize) -> f64 {
    libm::sqrt(k as f64 + 0.5)
}

/// Returns `(P_{k-1}(x), P_k(x), P_{k+1}(x))`, with `P_{-1} = 0`.
fn triple(k: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for m in 0..=k {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0) * x * cur - mf * prev) / (mf + 1.0);
        if m == k {
            return (prev, cur, next);
        }
        prev = cur;
        cur = next;
    }
    unreachable!()
}

/// Legendre polynomial `P_k(x)`.
pub fn legendre_p(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => triple(k - 1, x).2,
    }
}

/// Orthonormal Legendre function `L_k(x) = P_k(x) sqrt(k + 1/2)`.
pub fn legendre_l(k: usize, x: f64) -> f64 {
    legendre_p(k, x) * norm_factor(k)
}

/// `(L_0(x), ..., L_{k_max}(x))` in one recurrence pass.
pub fn legendre_l_row(k_max: usize, x: f64) -> Vec<f64> {
    let mut row = vec![0.0; k_max + 1];
    legendre_l_row_into(x, &mut row);
    row
}

/// Fills `out[k] = L_k(x)` for `k < out.len()`.
pub fn legendre_l_row_into(x: f64, out: &mut [f64]) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = cur * norm_factor(k);
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
}

/// Past this distance from the endpoints the closed-form derivative identity
/// divides by a vanishing `1 - x^2`; the derivative recurrence is used instead.
const DERIV_EDGE: f64 = 1e-4;

/// Derivative `P'_k(x)`.
///
/// Uses `(1 - x^2) P'_k = k (P_{k-1} - x P_k)` in the interior and the exact value
/// `(+-1)^{k-1} k (k + 1) / 2` at the endpoints.
pub fn legendre_p_deriv(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if x == 1.0 || x == -1.0 {
        return endpoint_deriv(k, x);
    }
    if 1.0 - libm::fabs(x) < DERIV_EDGE {
        return deriv_by_recurrence(k, x);
    }
    let (pm1, p, _) = triple(k, x);
    k as f64 * (pm1 - x * p) / (1.0 - x * x)
}

fn endpoint_deriv(k: usize, x: f64) -> f64 {
    let kf = k as f64;
    let mag = kf * (kf + 1.0) / 2.0;
    if x > 0.0 || k % 2 == 1 {
        mag
    } else {
        -mag
    }
}

// P'_{m+1} = P'_{m-1} + (2m + 1) P_m
fn deriv_by_recurrence(k: usize, x: f64) -> f64 {
    let (mut p_prev, mut p_cur) = (1.0, x);
    let (mut d_prev, mut d_cur) = (0.0, 1.0);
    for m in 1..k {
        let mf = m as f64;
        let p_next = ((2.0 * mf + 1.0) * x * p_cur - mf * p_prev) / (mf + 1.0);
        let d_next = d_prev + (2.0 * mf + 1.0) * p_cur;
        p_prev = p_cur;
        p_cur = p_next;
        d_prev = d_cur;
        d_cur = d_next;
    }
    d_cur
}

/// Christoffel-Darboux kernel `G_k(x, y) = sum_{m=0}^{k} L_m(x) L_m(y)`.
///
/// Uses the two-term ratio
/// `(k + 1)/2 * [P_{k+1}(x) P_k(y) - P_k(x) P_{k+1}(y)] / (x - y)`
/// rewritten as `(k + 1)/2 * [P_k(x) d_{k+1} - P_{k+1}(x) d_k]` with divided
/// differences `d_j = (P_j(x) - P_j(y)) / (x - y)`. These follow their own
/// recurrence
///
/// ```text
/// (j + 1) d_{j+1} = (2j + 1) (x d_j + P_j(y)) - j d_{j-1},   d_0 = 0, d_1 = 1
/// ```
///
/// so nothing is divided by `x - y` and near-diagonal arguments keep full
/// accuracy; at `x = y` it is the diagonal form `P_k P'_{k+1} - P_{k+1} P'_k`.
pub fn cd_kernel(k: usize, x: f64, y: f64) -> f64 {
    let (mut px_prev, mut px) = (0.0, 1.0);
    let (mut py_prev, mut py) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    for j in 0..=k {
        let jf = j as f64;
        let a = (2.0 * jf + 1.0) / (jf + 1.0);
        let b = jf / (jf + 1.0);
        let d_next = a * (x * d + py) - b * d_prev;
        (px_prev, px) = (px, a * x * px - b * px_prev);
        (py_prev, py) = (py, a * y * py - b * py_prev);
        (d_prev, d) = (d, d_next);
    }
    // px = P_{k+1}(x), px_prev = P_k(x), d = d_{k+1}, d_prev = d_k.
    (k as f64 + 1.0) / 2.0 * (px_prev * d - px * d_prev)
}
