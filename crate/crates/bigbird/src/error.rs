//! Crate-wide error type.

use std::fmt;

/// Errors produced by pattern construction, attention evaluation, and the
/// verification machinery.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A pattern or model configuration violates one of its invariants.
    InvalidConfig(String),
    /// Two tensors/matrices that must agree in shape do not.
    ShapeMismatch { expected: String, got: String },
    /// A mask row has no neighbors, so attention weights are undefined.
    EmptyMaskRow { row: usize },
    /// An index pointed outside the structure it indexes.
    IndexOutOfRange { index: usize, len: usize },
    /// Graph diagnostics that require a connected graph got a disconnected one.
    Disconnected,
    /// Power iteration hit its iteration cap before reaching tolerance.
    NoConvergence { iters: usize },
    /// A matrix handed to the exact-arithmetic machinery is not a grid point.
    OffGrid(String),
    /// Exhaustive enumeration was asked for more points than the cap allows.
    EnumerationTooLarge { points: u128, cap: u128 },
    /// Parse failure while reading a serialized mask or parameter container.
    Parse(String),
    /// Wrapped I/O error.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            Self::ShapeMismatch { expected, got } => {
                write!(f, "shape mismatch: expected {expected}, got {got}")
            }
            Self::EmptyMaskRow { row } => write!(f, "mask row {row} has no neighbors"),
            Self::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Self::Disconnected => write!(f, "graph is disconnected"),
            Self::NoConvergence { iters } => {
                write!(f, "power iteration did not converge within {iters} iterations")
            }
            Self::OffGrid(msg) => write!(f, "input is not a grid point: {msg}"),
            Self::EnumerationTooLarge { points, cap } => {
                write!(f, "enumeration of {points} grid points exceeds cap {cap}")
            }
            Self::Parse(msg) => write!(f, "parse error: {msg}"),
            Self::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
