use alloc::string::String;
use core::fmt;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Cell index outside the grid.
    IndexOutOfRange { col: usize, row: usize, n_cols: usize, n_rows: usize },
    /// Degenerate or otherwise invalid geometry.
    Geometry(String),
    /// Inputs that must share a grid or coordinate system do not.
    Alignment(String),
    /// An operation that needs at least one element received none.
    EmptyInput(String),
    /// Invalid argument or inconsistent data.
    Validation(String),
    /// A metric is undefined for the given data.
    UndefinedMetric(String),
    /// A model lacks the structure an operation requires.
    ModelCompat(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::IndexOutOfRange { col, row, n_cols, n_rows } => write!(
                f,
                "cell ({col}, {row}) out of range for a {n_cols}x{n_rows} grid"
            ),
            Error::Geometry(msg) => write!(f, "geometry error: {msg}"),
            Error::Alignment(msg) => write!(f, "alignment error: {msg}"),
            Error::EmptyInput(msg) => write!(f, "empty input: {msg}"),
            Error::Validation(msg) => write!(f, "validation error: {msg}"),
            Error::UndefinedMetric(msg) => write!(f, "undefined metric: {msg}"),
            Error::ModelCompat(msg) => write!(f, "model compatibility error: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
