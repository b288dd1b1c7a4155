use thiserror::Error;

/// Errors raised by the estimators and verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0} (expected 1, 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{name} is not in L^p: {reason}")]
    NotInLp { name: String, reason: String },

    #[error("no analytic oracle for {what} of {name}")]
    MissingOracle { name: String, what: String },

    #[error("difference quotient undefined at coincident points")]
    CoincidentPoints,

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("singular integral cannot be controlled: {0}")]
    Singularity(String),

    #[error("profile is not in the asymptotic regime: {0}")]
    NotAsymptotic(String),

    #[error("{name} is not admissible for {check}: {reason}")]
    NotAdmissible {
        name: String,
        check: String,
        reason: String,
    },

    #[error("band j={j} is outside the resolvable range [{min}, {max}] of the grid")]
    UnresolvedBand { j: i32, min: i32, max: i32 },

    #[error("multiplier is singular at the zero frequency: |u^(0)|/max|u^| = {ratio:e}")]
    ZeroFrequency { ratio: f64 },

    #[error("unknown test function {0:?}")]
    UnknownFunction(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed field file: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
