use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid misaligned: {0}")]
    GridMisaligned(String),

    #[error("grid does not cover the required interval: {0}")]
    GridCoverage(String),

    #[error("quadrature accuracy not reached after {intervals} subintervals (estimate {estimate:e}, error {error:e})")]
    AccuracyNotReached {
        intervals: usize,
        estimate: f64,
        error: f64,
    },

    #[error("degenerate denominator: no path satisfied the conditioning event")]
    DegenerateDenominator,

    #[error("batch layout error: {0}")]
    BatchLayout(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
