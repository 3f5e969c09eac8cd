use alloc::string::String;
use core::fmt;

/// Errors surfaced by the library's fallible operations.
///
/// Contract violations (shape mismatches, empty inputs where data is
/// required, out-of-range parameters) are reported through this type rather
/// than panics so that callers driving the library from configuration files
/// get a diagnosable failure.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two vectors that must share a dimension do not.
    DimensionMismatch { expected: usize, got: usize },
    /// An operation that needs data was handed an empty collection.
    Empty(&'static str),
    /// A configuration value is outside its documented range.
    InvalidConfig(String),
    /// A numeric result left the finite range (NaN or infinity).
    NonFinite(&'static str),
    /// A stored structure violates its shape contract.
    MalformedTrajectory(&'static str),
    /// A serialized snapshot could not be decoded.
    BadSnapshot(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::Empty(what) => write!(f, "{what} is empty"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::MalformedTrajectory(msg) => write!(f, "malformed trajectory: {msg}"),
            Error::BadSnapshot(msg) => write!(f, "bad snapshot: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
