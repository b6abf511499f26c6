//! Single JSON configuration document with optional sections
//! `distribution`, `weights`, `score`, `loss`, `train` and `multilabel`.
//! Unknown keys are rejected.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use wsol_core::{CombinedLossSpec, LossConfig, LossSpec, MultilabelSpec, ScoreKind, ThresholdDistribution, WeightSpec};
use wsol_trainer::{default_eval_weights, Activation, Batching, Optimizer};

use crate::exit::{Failure, Outcome};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppConfig {
    #[serde(default)]
    pub distribution: Option<ThresholdDistribution<f64>>,
    #[serde(default)]
    pub weights: Option<WeightSpec<f64>>,
    #[serde(default)]
    pub score: Option<ScoreKind>,
    #[serde(default)]
    pub loss: Option<LossConfig<f64>>,
    #[serde(default)]
    pub train: Option<TrainSection>,
    #[serde(default)]
    pub multilabel: Option<MultilabelSpec<f64>>,
}

impl AppConfig {
    pub fn distribution(&self) -> ThresholdDistribution<f64> {
        self.distribution.unwrap_or_default()
    }

    pub fn weights(&self) -> WeightSpec<f64> {
        self.weights.clone().unwrap_or_default()
    }

    /// The `loss` section, or one built from `score`/`weights`/`distribution`.
    pub fn loss(&self) -> CombinedLossSpec<f64> {
        match &self.loss {
            Some(l) => l.clone().into_combined(),
            None => CombinedLossSpec::single(LossSpec::new(
                self.score.unwrap_or(ScoreKind::Tss),
                self.weights(),
                self.distribution(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub epochs: usize,
    pub learning_rate: f64,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub optimizer: Optimizer,
    pub batching: Batching,
    /// Weights of the weighted scores in histories and reports.
    pub eval_weights: WeightSpec<f64>,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 0.01,
            hidden: vec![8],
            activation: Activation::Tanh,
            optimizer: Optimizer::default(),
            batching: Batching::Full,
            eval_weights: default_eval_weights(),
        }
    }
}

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::input)
}

/// Parses a JSON file; syntax and schema errors are configuration errors.
pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Outcome<T> {
    let text = read(path)?;
    serde_json::from_str(&text)
        .with_context(|| format!("invalid configuration in {}", path.display()))
        .map_err(Failure::config)
}

pub fn load_config(path: Option<&Path>) -> Outcome<AppConfig> {
    match path {
        Some(p) => load_json(p),
        None => Ok(AppConfig::default()),
    }
}
