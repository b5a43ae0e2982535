//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the detection pipeline and evaluation harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Image byte stream could not be decoded.
    #[error("image decode failed: {0}")]
    Decode(String),

    /// Underlying I/O failure (table files, image files).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Color name table has the wrong number of rows.
    #[error("color name table: expected 32768 rows, found {found}")]
    TableRowCount { found: usize },

    /// A specific table row is malformed.
    #[error("color name table row {row}: {reason}")]
    TableRow { row: usize, reason: String },

    /// A value violated an operation's input contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Two rasters that must share dimensions do not.
    #[error("dimension mismatch: {expected:?} vs {found:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        found: (u32, u32),
    },

    /// Ground truth mask contains no foreground pixels.
    #[error("ground truth mask is empty")]
    EmptyGroundTruth,

    /// Map and ground-truth lists are not aligned.
    #[error("dataset mismatch: {0}")]
    DatasetMismatch(String),

    /// Parameter grid contains no candidate values.
    #[error("parameter grid is empty")]
    EmptyGrid,

    /// A tunable parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

pub type Result<T> = std::result::Result<T, Error>;
