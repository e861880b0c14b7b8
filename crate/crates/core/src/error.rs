use thiserror::Error;

/// Errors raised by the library. Variants are grouped by the CLI into
/// validation failures and numeric failures (see [`Error::is_validation`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}, tolerance {tolerance:e}")]
    Quadrature {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("model is unclassifiable: {0}")]
    Unclassifiable(String),

    #[error("jump part has infinite variation: {0}")]
    InfiniteVariation(String),

    #[error("unsupported limit law for this quantity: {0}")]
    UnsupportedLaw(String),

    #[error("no barrier exit before time cap {cap}")]
    HorizonExceeded { cap: f64 },

    #[error("expected jump count {expected} per step exceeds bound {bound}")]
    IntensityOverflow { expected: f64, bound: f64 },

    #[error("jump density exceeded its declared envelope: g({at}) = {value} > {bound}")]
    EnvelopeViolated { at: f64, value: f64, bound: f64 },

    #[error("observation series has no crossings")]
    EmptySeries,

    #[error("insufficient signal: {0}")]
    InsufficientSignal(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("observation times not strictly increasing at row {row}")]
    Monotonicity { row: usize },

    #[error("increment |{value}| < 1 at row {row}")]
    BarrierViolation { row: usize, value: f64 },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_)
                | Error::Unclassifiable(_)
                | Error::InfiniteVariation(_)
                | Error::UnsupportedLaw(_)
                | Error::Precondition(_)
                | Error::Schema(_)
                | Error::Monotonicity { .. }
                | Error::BarrierViolation { .. }
                | Error::Io(_)
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Quadrature { .. } => "quadrature",
            Error::Unclassifiable(_) => "unclassifiable",
            Error::InfiniteVariation(_) => "infinite_variation",
            Error::UnsupportedLaw(_) => "unsupported_law",
            Error::HorizonExceeded { .. } => "horizon_exceeded",
            Error::IntensityOverflow { .. } => "intensity_overflow",
            Error::EnvelopeViolated { .. } => "envelope_violated",
            Error::EmptySeries => "empty_series",
            Error::InsufficientSignal(_) => "insufficient_signal",
            Error::Precondition(_) => "precondition",
            Error::Schema(_) => "schema",
            Error::Monotonicity { .. } => "monotonicity",
            Error::BarrierViolation { .. } => "barrier_violation",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
