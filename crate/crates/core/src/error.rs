use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("amplitude sequence is empty")]
    EmptyAmplitudes,

    #[error("all amplitudes are zero; the density is undefined")]
    ZeroAmplitudes,

    #[error("amplitude {index} is not finite")]
    NonFiniteAmplitude { index: usize },

    #[error("scale must be positive and finite, got {0}")]
    InvalidScale(f64),

    #[error("grid size K={k} is below the minimum 2N+1={min} for N={order}")]
    GridTooSmall { k: usize, order: usize, min: usize },

    #[error("unsupported kernel degree {0}; supported degrees are 0, 1 and 2")]
    UnsupportedDegree(u32),

    #[error("coordinate {0} is outside the open interval (-1, 1)")]
    OutsideDomain(f64),

    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample set is empty")]
    EmptySamples,

    #[error("malformed model text at line {line}: {reason}")]
    ModelText { line: usize, reason: String },
}
