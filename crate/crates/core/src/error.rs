use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration value violates its invariant.
    InvalidConfig(String),
    /// Input outside the mathematical domain of an operation.
    Domain(&'static str),
    /// Position outside `[0, track_length]`.
    OutOfRange {
        position: f64,
        track_length: f64,
    },
    EmptyInput(&'static str),
    /// Caller broke a documented precondition.
    Precondition(&'static str),
    /// The handover state machine must be stepped on consecutive ticks.
    NonMonotonicTick {
        expected: u32,
        got: u32,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::OutOfRange {
                position,
                track_length,
            } => write!(
                f,
                "position {position} m outside track [0, {track_length}] m"
            ),
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::NonMonotonicTick { expected, got } => {
                write!(f, "expected tick {expected}, got {got}")
            }
        }
    }
}

impl core::error::Error for Error {}
