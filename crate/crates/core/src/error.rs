use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("observed examples are inconsistent with every linear functional")]
    Inconsistent,

    #[error("subspace dimensions sum to {requested}, exceeding ambient dimension {ambient}")]
    InfeasibleDimensions { requested: usize, ambient: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid simplex weights: {0}")]
    InvalidWeights(String),

    #[error("a sampling round must contain at least one request")]
    EmptyBatch,

    #[error("empirical error of an empty sample is undefined")]
    EmptySample,

    #[error("hypothesis class is empty")]
    EmptyClass,

    #[error("hypothesis class with 2^{log2_size} members is too large to enumerate")]
    ClassTooLarge { log2_size: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("reward {value} at index {index} lies outside [0, 1]")]
    RewardOutOfRange { index: usize, value: f64 },

    #[error("oracle queried outside the observable region at iteration {iteration}")]
    QueryOutsideRegion { iteration: usize },

    #[error("distribution {dist} has positive weight but no data")]
    MissingData { dist: usize },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
