use thiserror::Error;
use wsol_core::WsolError;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Core(#[from] WsolError),
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T, E = TrainError> = std::result::Result<T, E>;
