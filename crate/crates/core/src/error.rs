use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index:?} outside grid of shape {shape:?}")]
    OutOfRange {
        index: Vec<usize>,
        shape: Vec<usize>,
    },

    #[error("quadrature did not converge: estimated error {estimate:e} exceeds {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("time step {tau:e} violates the CFL bound {bound:e}")]
    CflViolation { tau: f64, bound: f64 },

    #[error("non-finite value produced at time step {step}")]
    NonFinite { step: usize },

    #[error("fixed-point iteration stalled at time step {step}: residual {residual:e} after {iterations} iterations")]
    FixedPoint {
        step: usize,
        residual: f64,
        iterations: usize,
    },

    #[error("L-infinity stability bound violated at step {step}: |U| = {norm:e} > {bound:e}")]
    Stability { step: usize, norm: f64, bound: f64 },

    #[error("control set is empty")]
    EmptyControls,

    #[error("line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("I/O failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::NonFinite { .. }
                | Error::FixedPoint { .. }
                | Error::Stability { .. }
        )
    }
}
