use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{context}: {value} is outside the domain {domain}")]
    Domain {
        context: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameter {name} = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid label {0}: expected -1 or +1")]
    Label(f64),

    #[error("weight function is not even (max asymmetry {max_asymmetry:e})")]
    NotEven { max_asymmetry: f64 },

    #[error("weight function is negative ({value:e}) at w = {at}")]
    NegativeWeight { at: f64, value: f64 },

    #[error("probability transform violates b(x) = b(1 - x) (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("quadrature on [{lower}, {upper}] did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    Quadrature {
        lower: f64,
        upper: f64,
        tolerance: f64,
        estimate: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("non-finite {0} encountered")]
    NonFinite(&'static str),

    #[error("degenerate margin: the total margin is zero")]
    DegenerateMargin,

    #[error("empty component list")]
    EmptyComponents,

    #[error("empty model")]
    EmptyModel,

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
