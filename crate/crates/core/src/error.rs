use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WsolError {
    #[error("invalid threshold distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid weight specification: {0}")]
    InvalidWeights(String),

    #[error("empty series")]
    EmptySeries,

    #[error("length mismatch: {predictions} predictions vs {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },

    #[error("prediction {value} at index {index} is not strictly inside (0, 1)")]
    PredictionOutOfRange { index: usize, value: f64 },

    #[error("threshold {0} is not strictly inside (0, 1)")]
    ThresholdOutOfRange(f64),

    #[error("value-weighted evaluation requires a chronological series")]
    NotChronological,

    #[error(
        "past prediction {value} at index {index} lies outside the open support ({lower}, {upper}) of the threshold prior (power-interval precondition)"
    )]
    OutsideSupport {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(&'static str),

    #[error("invalid loss specification: {0}")]
    InvalidLoss(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Input(String),
}

pub type Result<T, E = WsolError> = std::result::Result<T, E>;
