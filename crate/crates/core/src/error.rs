use thiserror::Error;

/// Failures reported by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point lies on the focal ring (distance {distance:e})")]
    FocalRing { distance: f64 },
    #[error("toroidal basis is degenerate on the symmetry axis (eta = {eta:e})")]
    AxisDegenerate { eta: f64 },
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("overflow while evaluating {0}")]
    Overflow(String),
    #[error("series did not converge: {what} (tail estimate {tail:e})")]
    NonConvergence { what: String, tail: f64 },
    #[error("point inside the excluded band |eta - eta0| = {distance:e} <= {band:e}")]
    EtaBandViolation { distance: f64, band: f64 },
    #[error("coefficient table region does not match the evaluation point")]
    RegionMismatch,
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("point is too close to the knot (distance {distance:e})")]
    TooCloseToSource { distance: f64 },
    #[error("point lies on the current ring")]
    OnRing,
    #[error("loop passes within {distance:e} of the knot (minimum {minimum:e})")]
    LoopTooCloseToSource { distance: f64, minimum: f64 },
    #[error("linking integral {value} is not close to an integer")]
    AmbiguousLinking { value: f64 },
    #[error("invalid knot: {0}")]
    InvalidSpec(String),
    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),
    #[error("malformed coefficient cache: {0}")]
    CacheFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
