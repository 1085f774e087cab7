use thiserror::Error;

use crate::trajectory::Snapshot;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("kernel `{0}` is discontinuous at the origin and has no global Lipschitz constant")]
    DiscontinuousKernel(String),

    #[error(
        "bump radius {radius} violates r < d_min/2: agents {first} and {second} are {distance} apart"
    )]
    RadiusTooLarge {
        radius: f64,
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("total masses differ: {left} vs {right}")]
    MassMismatch { left: f64, right: f64 },

    #[error("size guard exceeded: {0}")]
    TooLarge(String),

    #[error("kernel support radius {support} is not smaller than the periodic length {length}")]
    SupportExceedsPeriod { support: f64, length: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64, last_valid: Box<Snapshot> },

    #[error("negative density {value} in cell {cell} at t = {t}")]
    NegativeDensity { t: f64, cell: usize, value: f64 },

    #[error("transport solver did not converge after {0} pivots")]
    SimplexStalled(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of a running computation, as opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. } | Error::NegativeDensity { .. } | Error::SimplexStalled(_)
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
