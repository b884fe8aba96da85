//! Adaptive nonparametric regression and density estimation on `[-1, 1]` by
//! Fourier-Legendre series.
//!
//! The estimators expand the unknown function in the orthonormal Legendre basis
//! `L_k = P_k * sqrt(k + 1/2)`, estimate the coefficients empirically and pick the
//! truncation index from the data alone: `N(n)` minimises the block energy
//! `tau(n, N) = sum_{k=N+1}^{2N} c_k^2` over `N = 1..=n/3`. The same block
//! statistics give a plug-in estimate of the residual decay ratio `gamma` and an
//! adaptive confidence bound for the integrated squared error.
//!
//! ```
//! use legadapt_core::estimators::{fit_adaptive, DensitySample};
//!
//! let xi: Vec<f64> = (0..64).map(|i| -0.9 + 1.8 * (i as f64) / 63.0).collect();
//! let sample = DensitySample::new(xi).unwrap();
//! let (fit, scan) = fit_adaptive(&sample).unwrap();
//! assert_eq!(scan.tau(scan.n_selected()), scan.tau_star());
//! assert!((fit.integral() - 1.0).abs() < 1e-12);
//! ```
//!
//! The crate is `no_std` and only needs `alloc`. Sampling, campaign execution and
//! file formats live in the `legadapt` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod confidence;
mod error;
pub mod estimators;
pub mod legendre;
pub mod quadrature;
pub mod sum;
pub mod truth;

pub use error::{Degeneracy, Error};

pub type Result<T> = core::result::Result<T, Error>;
