use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension n = {0}; need n >= 1")]
    InvalidDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("loss coordinate {index} = {value} violates |l_i| <= 1")]
    LossOutOfRange { index: usize, value: f64 },

    #[error("coordinate {index} = {value} is not interior to (0, 1)")]
    BoundaryPoint { index: usize, value: f64 },

    #[error("n = {n} exceeds the cap of {cap} for exhaustive (reference implementation only) computations")]
    ReferenceTooLarge { n: usize, cap: usize },

    #[error("matrix is not positive definite; check that gamma > 0")]
    NotPositiveDefinite,

    #[error(
        "horizon too short: T = {horizon} gives gamma = {gamma:.4} >= 1; need T >= {min_horizon}"
    )]
    HorizonTooShort {
        horizon: u64,
        gamma: f64,
        min_horizon: u64,
    },

    #[error("game record is incomplete: {0}")]
    IncompleteRecord(String),

    #[error("loss sequence exhausted at round {round} (only {available} rows)")]
    SequenceExhausted { round: usize, available: usize },

    #[error("odd horizon T = {0} is only supported up to T = 24")]
    OddHorizon(u64),

    #[error("loss sequence row {row}, column {column}: {message}")]
    SequenceParse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
