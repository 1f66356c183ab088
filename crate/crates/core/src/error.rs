use alloc::string::String;

/// Errors raised by the algebra, code construction and simulation layers.
///
/// Decoding failures are not errors: an abandoned decode is reported through
/// [`DecodeOutcome`](crate::grand::DecodeOutcome).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("generator row {row} is linearly dependent on the rows above it")]
    RankDeficient { row: usize },

    #[error("block length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("CRC polynomial must have nonzero leading and trailing coefficients")]
    BadPolynomial,

    #[error("invalid code parameters: {0}")]
    InvalidSpec(String),

    #[error(
        "mask threshold is negative (tau = {tau:.6}); the requested mask error rate \
         exceeds the uncoded block error rate at this SNR, use a smaller merr"
    )]
    NegativeThreshold { tau: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing conditional statistics for stratum {0}")]
    MissingStratum(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = core::result::Result<T, Error>;
