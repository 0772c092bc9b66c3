use thiserror::Error;

/// Errors raised by the geometry and variation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (supported: 1, 2, 3)")]
    UnsupportedDimension(usize),

    #[error("body is unbounded")]
    Unbounded,

    #[error("origin is not an interior point of the body")]
    OriginNotInterior,

    #[error("polytope is lower-dimensional")]
    DegeneratePolytope,

    #[error("point is outside the interior of the effective domain")]
    OutsideDomain,

    #[error("effective domain is empty")]
    EmptyDomain,

    #[error("function vanishes identically")]
    ZeroFunction,

    #[error("integral not in (0,∞): {0}")]
    IntegralOutOfRange(String),

    #[error("no exponential envelope found within the search budget")]
    NoEnvelope,

    #[error("divergent quantity: {0}")]
    Divergent(String),

    #[error("point {0:?} is a nondifferentiability point of the potential")]
    KinkPoint(Vec<f64>),

    #[error("level set is empty at s = {0}")]
    EmptyLevelSet(f64),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("Steiner fit residual {0:e} exceeds tolerance")]
    FitResidual(f64),

    #[error("quotients not monotone: violation {violation:e} at index {index}")]
    NonMonotone { index: usize, violation: f64 },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
