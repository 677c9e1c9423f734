use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation requires a nonempty family")]
    EmptyFamily,

    #[error("ambient dimension must be at least 1")]
    ZeroDimension,

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("vector `{0}` is zero")]
    ZeroVector(String),

    #[error("family is identically zero")]
    AllZero,

    #[error("frame operator is singular on the ambient space (rank {rank} < dimension {dimension})")]
    SingularFrameOperator { rank: usize, dimension: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("lower Riesz bound is zero; the family is not a Riesz sequence")]
    ZeroLowerBound,

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("point has {found} coordinates, group expects {expected}")]
    CoordinateCount { expected: usize, found: usize },

    #[error("box enumeration of {size} points exceeds cap {cap}")]
    EnumerationCap { size: u128, cap: usize },

    #[error("set is not periodic with the declared period: {0}")]
    NotPeriodic(String),

    #[error("domain box too small: {0}")]
    DomainTooSmall(String),

    #[error("`{0}` has zero energy against the reference system")]
    ZeroEnergy(String),

    #[error("denominator density is {0}; relative density undefined")]
    DegenerateDensity(String),

    #[error("infeasible parameters: binding constraint `{constraint}` ({detail})")]
    Infeasible { constraint: String, detail: String },

    #[error("dual system does not reconstruct the reference window (residual {residual:.3e})")]
    InvalidDual { residual: f64 },

    #[error("selection failed: {reason}; best subset has {best_size} elements with lower bound {best_lower:.3e}")]
    SelectionFailed {
        reason: String,
        best_size: usize,
        best_lower: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("duplicate time-frequency point ({x}, {omega})")]
    DuplicateTfPoint { x: usize, omega: usize },

    #[error("window signal is zero")]
    ZeroWindow,

    #[error("system is not Bessel on the grid: {0}")]
    NotBessel(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn infeasible(constraint: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Infeasible {
            constraint: constraint.into(),
            detail: detail.into(),
        }
    }
}
