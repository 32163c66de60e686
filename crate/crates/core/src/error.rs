use thiserror::Error;

/// Errors raised by the sampling, spectral and statistics routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: matrices must be at least 1x1")]
    InvalidDimension(usize),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("unitarity defect {defect:e} exceeds tolerance {tolerance:e}")]
    NotUnitary { defect: f64, tolerance: f64 },

    #[error("Ginibre sample was numerically rank deficient in {attempts} consecutive attempts")]
    RankDeficient { attempts: usize },

    #[error("eigenvalue iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("eigenvalue modulus {modulus} deviates from 1 by more than {tolerance:e}")]
    OffUnitCircle { modulus: f64, tolerance: f64 },

    #[error("{name} = {value} is out of range: {requirement}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("sample sizes differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("replica {index} failed: {source}")]
    Replica {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(
    name: &'static str,
    value: impl Into<f64>,
    requirement: &'static str,
) -> Error {
    Error::OutOfRange {
        name,
        value: value.into(),
        requirement,
    }
}
