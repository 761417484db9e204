use thiserror::Error;

use crate::splitting::SplitClass;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{op}: shape mismatch, expected {expected}, got {found}")]
    ShapeMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("entry ({row}, {col}) is not finite: {value}")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("{op}: matrix must be square, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("{op}: size {n} exceeds the cap of {cap}")]
    SizeCap {
        op: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("{op}: matrix has a negative entry {value} at ({row}, {col})")]
    NegativeEntry {
        op: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("{op}: vector entry {index} = {value} is not strictly positive")]
    NotStrictlyPositive {
        op: &'static str,
        index: usize,
        value: f64,
    },

    #[error("{0}: splitting is not proper")]
    NotProper(&'static str),

    #[error("{op}: requires a {required:?} splitting, got {found:?}")]
    ClassTooWeak {
        op: &'static str,
        required: SplitClass,
        found: SplitClass,
    },

    #[error("{0}: the two splittings are of different matrices")]
    MismatchedSystem(&'static str),

    #[error("{0}: coefficient matrix is not semi-monotone")]
    NotSemimonotone(&'static str),

    #[error("{op}: spectral radius {rho} of the iteration matrix is not below one")]
    NotContractive { op: &'static str, rho: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub(crate) fn shape_str(rows: usize, cols: usize) -> String {
    format!("{rows}x{cols}")
}
