//! Weighted classification scores, threshold-averaged confusion matrices
//! and the weighted score-oriented losses built on them.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` aliases below fix the common double-precision instantiation.

pub mod confusion;
pub mod demo;
pub mod error;
pub mod expected_cm;
pub mod io;
pub mod loss;
pub mod multilabel;
pub mod num;
pub mod oracle;
pub mod report;
pub mod scores;
pub mod series;
pub mod special;
pub mod threshold_dist;
pub mod verify;
pub mod weight_spec;

pub use confusion::{hard_confusion, weighted_hard_confusion, ConfusionCounts, ConfusionEntries, WeightedCounts};
pub use error::{Result, WsolError};
pub use expected_cm::{
    expected_confusion, expected_tp_tn, expected_wfn, expected_wfp, power_intervals,
    ExpectedConfusion, PowerInterval, PowerIntervalDecomposition,
};
pub use loss::{
    combined_loss, expected_score_gap, loss_gradient, loss_value, loss_with_gradient, CombinedLossSpec, GradientVector, LossConfig,
    LossComponent, LossSpec, LossValue, ScoreGap,
};
pub use num::Scalar;
pub use multilabel::{multilabel_global_score, multilabel_wsol, Aggregator, ClassSpec, MultilabelSeries, MultilabelSpec};
pub use report::{sweep_report, ScoreRow, SweepReport, ThresholdSweep};
pub use scores::{apply_score, score_partials, ScoreKind, ScoreValue};
pub use series::LabeledSeries;
pub use threshold_dist::{DistributionKind, ThresholdDistribution};
pub use weight_spec::{eval_weight, WeightKind, WeightSpec};

pub type LabeledSeriesF64 = LabeledSeries<f64>;
pub type ThresholdDistributionF64 = ThresholdDistribution<f64>;
pub type WeightSpecF64 = WeightSpec<f64>;
pub type ExpectedConfusionF64 = ExpectedConfusion<f64>;
pub type LossSpecF64 = LossSpec<f64>;
pub type CombinedLossSpecF64 = CombinedLossSpec<f64>;

pub type LabeledSeriesF32 = LabeledSeries<f32>;
pub type ThresholdDistributionF32 = ThresholdDistribution<f32>;
pub type WeightSpecF32 = WeightSpec<f32>;
pub type LossSpecF32 = LossSpec<f32>;
