use core::fmt;

/// Reasons the block statistics cannot produce a usable `gamma` estimate or
/// confidence radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Degeneracy {
    /// No block size `M >= 1` satisfies `4M <= n/3`.
    NoBlock,
    /// `tau(2M) - 2 tau(M)` vanishes to within rounding.
    VanishingDenominator,
    /// The estimate fell outside the accepted window; the raw value is kept.
    GammaOutOfRange(f64),
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degeneracy::NoBlock => f.write_str("no block size M >= 1 with 4M <= n/3"),
            Degeneracy::VanishingDenominator => f.write_str("tau(2M) - 2 tau(M) vanishes; gamma is not identifiable"),
            Degeneracy::GammaOutOfRange(g) => write!(f, "gamma estimate {g} outside (0.001, 0.95)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    SampleTooSmall {
        n: usize,
        min: usize,
    },
    NonFinite {
        index: usize,
    },
    OutOfDomain {
        index: usize,
        value: f64,
    },
    /// Requested coefficient index exceeds what the sample size allows.
    CoeffRange {
        requested: usize,
        max: usize,
    },
    /// The table does not reach the index a computation needs.
    InsufficientCoefficients {
        needed: usize,
        available: usize,
    },
    QuadratureDiverged {
        order: usize,
        node: usize,
    },
    InvalidParameter(&'static str),
    /// Regression truths need `beta > 1/2`.
    RoughRegressionTruth {
        beta: f64,
    },
    /// The residual sequence of a generated class increased at this index.
    IncreasingResidual {
        index: usize,
    },
    InvalidDensity {
        x: f64,
        value: f64,
    },
    Degenerate(Degeneracy),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SampleTooSmall { n, min } => write!(f, "sample size {n} below minimum {min}"),
            Error::NonFinite { index } => write!(f, "non-finite value at index {index}"),
            Error::OutOfDomain { index, value } => {
                write!(f, "value {value} at index {index} outside [-1, 1]")
            }
            Error::CoeffRange { requested, max } => {
                write!(f, "coefficient index {requested} exceeds maximum {max}")
            }
            Error::InsufficientCoefficients { needed, available } => {
                write!(f, "need coefficients up to index {needed}, only {available} available")
            }
            Error::QuadratureDiverged { order, node } => {
                write!(f, "Newton iteration for node {node} of the order-{order} rule did not converge")
            }
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::RoughRegressionTruth { beta } => {
                write!(f, "regression truths require beta > 1/2 (got {beta}); adaptive rates fail below it")
            }
            Error::IncreasingResidual { index } => {
                write!(f, "residual energy increases at index {index}")
            }
            Error::InvalidDensity { x, value } => {
                write!(f, "density is negative ({value}) at x = {x}")
            }
            Error::Degenerate(d) => write!(f, "degenerate block statistics: {d}"),
        }
    }
}

impl core::error::Error for Error {}

impl From<Degeneracy> for Error {
    fn from(d: Degeneracy) -> Self {
        Error::Degenerate(d)
    }
}
