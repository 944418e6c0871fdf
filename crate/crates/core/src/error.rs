use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A Cholesky pivot was not strictly positive.
    NotPositiveDefinite { pivot: usize, value: f64 },
    /// LQ decomposition hit a (numerically) zero diagonal pivot.
    RankDeficient { column: usize },
    DimensionMismatch {
        what: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// An argument fell outside the support of a density or a type invariant.
    Domain(String),
    /// ARS starting abscissae leave the right tail of the hull unbounded.
    InvalidInitialPoints(String),
    InvalidConfig(String),
    InvalidTruth(String),
    NonConvergence { iterations: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPositiveDefinite { pivot, value } => {
                write!(f, "matrix is not positive definite (pivot {pivot} = {value})")
            }
            Error::RankDeficient { column } => {
                write!(f, "matrix is rank deficient at column {column}")
            }
            Error::DimensionMismatch {
                what,
                expected,
                got,
            } => write!(
                f,
                "dimension mismatch in {what}: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::InvalidInitialPoints(msg) => write!(f, "invalid initial abscissae: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InvalidTruth(msg) => write!(f, "invalid simulation truth: {msg}"),
            Error::NonConvergence { iterations } => {
                write!(f, "no convergence after {iterations} iterations")
            }
        }
    }
}

impl core::error::Error for Error {}
