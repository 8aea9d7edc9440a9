use thiserror::Error;

use crate::states::Kind;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("{what} violated: defect {defect:.3e}")]
    Constraint { what: &'static str, defect: f64 },

    #[error("state is not normalized: norm {0:.12}")]
    Normalization(f64),

    #[error("kind mismatch: expected {expected:?}, found {found:?}")]
    KindMismatch { expected: Kind, found: Kind },

    #[error("matrix is not unitary: defect {0:.3e}")]
    NotUnitary(f64),

    #[error("matrix is not Hermitian: defect {0:.3e}")]
    NotHermitian(f64),

    #[error("input contains non-finite entries")]
    NonFinite,

    #[error("point is not regular: {0}")]
    NonRegular(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
