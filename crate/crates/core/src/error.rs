use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel {0} not present in recording")]
    MissingChannel(String),

    #[error("duplicate channel {0}")]
    DuplicateChannel(String),

    #[error("invalid recording: {0}")]
    InvalidRecording(String),

    #[error("window starting at {start_s} s does not fit in recording of {duration_s} s")]
    WindowOutOfBounds { start_s: u64, duration_s: u64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("non-finite value in input")]
    NonFinite,

    #[error("value {0} is not a binary label")]
    NonBinary(u8),

    #[error("unknown metric {0:?}")]
    UnknownMetric(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
