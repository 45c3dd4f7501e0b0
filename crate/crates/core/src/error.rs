use thiserror::Error;

/// Errors raised by the modem primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` out of range: {value}")]
    Domain { name: &'static str, value: f64 },

    #[error("subcarrier index {index} outside 1..={count}")]
    Index { index: usize, count: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("{what}: expected {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("waveform too short: need {needed} samples, have {available}")]
    InsufficientLength { needed: usize, available: usize },

    #[error("sample rate mismatch: expected {expected} Hz, got {actual} Hz")]
    RateMismatch { expected: f64, actual: f64 },

    #[error("resampling ratio {0} has no small rational representation")]
    IrrationalRatio(f64),

    #[error("PRBS seed must select a nonzero register state")]
    ZeroSeed,

    #[error("frequency response: {0}")]
    Response(&'static str),

    #[error("input is empty")]
    Empty,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64) -> Error {
    Error::Domain { name, value }
}
