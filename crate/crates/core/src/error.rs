use thiserror::Error;

/// Errors raised by the numerical kernels and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("overflow in {func}: ln|value| = {ln_value:.3} exceeds the representable range")]
    Overflow { func: &'static str, ln_value: f64 },

    #[error("{func} did not converge after {terms} terms (last estimate {estimate:e})")]
    NoConvergence {
        func: &'static str,
        terms: usize,
        estimate: f64,
    },

    #[error("quadrature failed: achieved error estimate {estimate:e} > requested {requested:e}")]
    Quadrature { estimate: f64, requested: f64 },

    #[error("branch error in {func}: {detail}")]
    Branch { func: &'static str, detail: String },

    #[error("invalid quantum numbers: {0}")]
    Sector(String),

    #[error("lattice budget exceeded: {needed} cells needed, cap is {cap}")]
    Budget { needed: usize, cap: usize },

    #[error("lattice tail mass {tail:e} exceeds the allowed {allowed:e}")]
    TailMass { tail: f64, allowed: f64 },

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
