//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("negative power {power} requested on non-invertible system {system}")]
    NegativePowerOnNonInvertible { system: String, power: i64 },

    #[error("cell family not supported by system {system}: {family}")]
    UnsupportedCellFamily { system: String, family: String },

    #[error("operation not supported by system {system}: {op}")]
    UnsupportedOperation { system: String, op: String },

    #[error("partitions belong to different systems: {left} vs {right}")]
    SystemMismatch { left: String, right: String },

    #[error("negative weight {0} in probability vector")]
    NegativeWeight(f64),

    #[error("probability vector sums to {0}, not 1")]
    SumNotOne(f64),

    #[error("refinement cell count {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("incompatible function representations: {0}")]
    RepresentationMismatch(String),

    #[error("point does not carry symbol data at coordinate {0}")]
    WindowExhausted(i64),

    #[error("point representation does not match system {0}")]
    PointMismatch(String),

    #[error("need at least {needed} snapshot pairs, got {got}")]
    TooFewSnapshots { needed: usize, got: usize },

    #[error("epsilon {0} is below the numeric floor 1e-12")]
    EpsilonTooSmall(f64),

    #[error("delta must be positive, got {0}")]
    DeltaNonPositive(f64),

    #[error("chart of dimension {chart} cannot hold orbit of length {requested}")]
    ChartOverflow { chart: usize, requested: usize },

    #[error("grid of {grid} points needs autocorrelation length >= {needed}, got {got}")]
    GridTooFine { grid: usize, needed: usize, got: usize },

    #[error("horizon {requested} exceeds model horizon {available}")]
    HorizonExceeded { requested: usize, available: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
