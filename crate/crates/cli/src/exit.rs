//! Exit-code map: 0 ok, 1 input, 2 configuration, 3 verification
//! failure, 4 divergence.

use std::fmt;

use wsol_core::WsolError;
use wsol_trainer::TrainError;

pub const INPUT: u8 = 1;
pub const CONFIG: u8 = 2;
pub const VERIFY: u8 = 3;
pub const DIVERGED: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type Outcome<T> = Result<T, Failure>;

impl Failure {
    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }

    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Self::new(INPUT, error)
    }

    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Self::new(CONFIG, error)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

/// Data problems exit 1; incompatible settings exit 2.
pub fn code_of(e: &WsolError) -> u8 {
    match e {
        WsolError::EmptySeries
        | WsolError::LengthMismatch { .. }
        | WsolError::PredictionOutOfRange { .. }
        | WsolError::DegenerateDenominator(_)
        | WsolError::Input(_) => INPUT,
        _ => CONFIG,
    }
}

impl From<WsolError> for Failure {
    fn from(e: WsolError) -> Self {
        Self::new(code_of(&e), e)
    }
}

impl From<TrainError> for Failure {
    fn from(e: TrainError) -> Self {
        let code = match &e {
            TrainError::Core(inner) => code_of(inner),
            TrainError::Diverged { .. } => DIVERGED,
            TrainError::Input(_) => INPUT,
            TrainError::InvalidModel(_) | TrainError::InvalidConfig(_) => CONFIG,
        };
        Self::new(code, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::input(e)
    }
}
