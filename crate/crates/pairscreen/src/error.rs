use thiserror::Error;

/// Errors produced while loading data, discretizing, or fitting.
///
/// Per-pair failures inside a sweep (`Collinear`, `DegeneratePair`) are
/// recorded as skips by [`crate::screen::screen`] and never abort the run;
/// they only surface as hard errors from the single-pair entry points.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("column '{0}' is constant and cannot be standardized")]
    ConstantColumn(String),

    #[error("bad response: {0}")]
    BadResponse(String),

    #[error("dataset too small: need n >= 4 and p >= 2, got n = {n}, p = {p}")]
    DimensionTooSmall { n: usize, p: usize },

    #[error("column {0} collapsed to a single level during discretization")]
    DegenerateColumn(usize),

    #[error("response collapsed to a single class")]
    DegenerateResponse,

    #[error("pair ({i}, {j}) includes a variable with fewer than two levels")]
    DegeneratePair { i: usize, j: usize },

    #[error("collinear design for pair ({i}, {j})")]
    Collinear { i: usize, j: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
