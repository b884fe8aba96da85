//! Command-line front end, file formats and Monte Carlo harness for the
//! adaptive Legendre estimators in [`legadapt_core`].

pub mod campaign;
pub mod cli;
pub mod error;
pub mod input;
pub mod noise;
pub mod report;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use legadapt_core as core;
