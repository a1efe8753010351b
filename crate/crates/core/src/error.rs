use thiserror::Error;

/// Errors raised by samplers, estimators and numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point pattern is empty")]
    EmptyPattern,

    #[error("window {width}x{height} is too small for interaction range {range} (need at least {} per side)", 2.0 * range)]
    WindowTooSmall { width: f64, height: f64, range: f64 },

    #[error("singular path loss evaluated at distance zero")]
    SingularAtZero,

    #[error(
        "quadrature did not reach tolerance {tolerance:e} (estimate {estimate}, error {error:e})"
    )]
    QuadratureFailure {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("fading CDF has no polynomial order at zero (pure log-normal)")]
    NoPolynomialDecay,

    #[error("only {got} samples landed in the contact-distance bin (need {needed})")]
    BinStarved { got: usize, needed: usize },

    #[error("target {target} is outside the observed range [{lo}, {hi}]")]
    OutOfRange { target: f64, lo: f64, hi: f64 },

    #[error("{got} usable points in the fit range, need at least {needed}")]
    InsufficientPoints { got: usize, needed: usize },

    #[error("mean SINR diverges under singular path loss")]
    SingularMeanDiverges,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Stable variant name, used by the CLI when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptyPattern => "EmptyPattern",
            Error::WindowTooSmall { .. } => "WindowTooSmall",
            Error::SingularAtZero => "SingularAtZero",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::NoPolynomialDecay => "NoPolynomialDecay",
            Error::BinStarved { .. } => "BinStarved",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::InsufficientPoints { .. } => "InsufficientPoints",
            Error::SingularMeanDiverges => "SingularMeanDiverges",
            Error::InvalidParameter(_) => "InvalidParameter",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
