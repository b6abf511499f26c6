//! Feed-forward classifiers trained by minimizing weighted score-oriented
//! losses on chronological event data.

pub mod data;
pub mod error;
pub mod experiment;
pub mod model;
pub mod train;

pub use data::{generate_temporal_dataset, read_dataset_csv, write_dataset_csv, SyntheticSeriesConfig, TemporalDataset};
pub use error::{Result, TrainError};
pub use experiment::{check_model_gradients, compare_losses, default_loss_pair, Comparison, ComparisonRow, ExperimentConfig};
pub use model::{Activation, Mlp};
pub use train::{
    default_eval_weights, evaluate, loss_and_param_gradient, train, Batching, EpochRecord, History, Optimizer,
    Scores, TrainConfig,
};

pub type MlpF64 = Mlp<f64>;
pub type MlpF32 = Mlp<f32>;
pub type TrainConfigF64 = TrainConfig<f64>;
pub type TemporalDatasetF64 = TemporalDataset<f64>;
