use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no positive secrecy: eavesdropper crossover {q} is below main crossover {p}")]
    NoPositiveSecrecy { p: f64, q: f64 },

    #[error("block length {0} too large for exact enumeration (max 16)")]
    TooLarge(usize),

    #[error("LFSR initial state is all zero")]
    ZeroState,

    #[error("secure index set holds {available} bits but the tag needs {required}")]
    InsufficientSecureCapacity { available: usize, required: usize },

    #[error("malformed channel word: expected {expected} bits, got {actual}")]
    MalformedInput { expected: usize, actual: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by caller-supplied parameters rather than by
    /// data flowing through the protocol.
    pub fn is_parameter_error(&self) -> bool {
        matches!(
            self,
            Error::NotPowerOfTwo(_)
                | Error::Domain(_)
                | Error::InvalidParameter(_)
                | Error::NoPositiveSecrecy { .. }
                | Error::TooLarge(_)
                | Error::ZeroState
                | Error::InsufficientSecureCapacity { .. }
                | Error::Parse(_)
        )
    }
}
