use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures shared by every module of the crate.
///
/// Input errors are problems with what the caller supplied; capacity errors
/// are refusals of well-formed requests that exceed a configured bound.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid character {found:?} at position {position}, expected '0' or '1'")]
    InvalidBit { position: usize, found: char },

    #[error("bit string has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("bit width {0} is outside the supported range 1..=64")]
    InvalidWidth(usize),

    #[error("{0}")]
    InvalidInput(String),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

impl Error {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity(_))
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}
