//! Synthetic event series with noisy leading indicators, and the dataset
//! CSV format (feature columns plus `label`).

use std::io::{Read, Write};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use wsol_core::{LabeledSeries, Scalar};

use crate::error::{Result, TrainError};

/// Features and labels in chronological order.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalDataset<T> {
    pub features: Vec<Vec<T>>,
    pub labels: Vec<bool>,
}

impl<T: Scalar> TemporalDataset<T> {
    pub fn new(features: Vec<Vec<T>>, labels: Vec<bool>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(TrainError::Input(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if features.is_empty() {
            return Err(TrainError::Input("empty series".into()));
        }
        let m = features[0].len();
        if m == 0 || features.iter().any(|r| r.len() != m) {
            return Err(TrainError::Input("feature rows must share a positive width".into()));
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y).count()
    }

    /// Pairs the labels with model predictions.
    pub fn series(&self, predictions: Vec<T>) -> Result<LabeledSeries<T>> {
        Ok(LabeledSeries::new(predictions, self.labels.clone())?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSeriesConfig {
    pub n: usize,
    pub event_rate: f64,
    /// Amplitude of the label-driven part of each feature.
    pub signal: f64,
    /// Standard deviation of the additive Gaussian noise.
    pub noise: f64,
    /// Look-ahead of the precursor feature.
    pub window: usize,
    pub seed: u64,
}

impl Default for SyntheticSeriesConfig {
    fn default() -> Self {
        Self {
            n: 400,
            event_rate: 0.2,
            signal: 1.0,
            noise: 0.6,
            window: 3,
            seed: 0,
        }
    }
}

impl SyntheticSeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(TrainError::InvalidConfig("n must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.event_rate) {
            return Err(TrainError::InvalidConfig("event_rate must lie in [0, 1]".into()));
        }
        if !(self.signal.is_finite() && self.noise.is_finite() && self.noise >= 0.0) {
            return Err(TrainError::InvalidConfig("signal and noise must be finite, noise >= 0".into()));
        }
        if self.window == 0 {
            return Err(TrainError::InvalidConfig("window must be >= 1".into()));
        }
        Ok(())
    }
}

const MAX_BURST: usize = 3;

/// Binomial event count arranged in bursts of 1 to 3 consecutive positives.
fn burst_labels(rng: &mut ChaCha8Rng, n: usize, rate: f64) -> Vec<bool> {
    let k = Binomial::new(n as u64, rate).expect("valid rate").sample(rng) as usize;
    let mut bursts = Vec::new();
    let mut left = k;
    while left > 0 {
        let b = rng.gen_range(1..=MAX_BURST).min(left);
        bursts.push(b);
        left -= b;
    }
    let negatives = n - k;
    // bursts sit in distinct gaps between negatives
    while bursts.len() > negatives + 1 {
        let b = bursts.pop().expect("non-empty");
        let last = bursts.len() - 1;
        bursts[last] += b;
    }
    let mut slots = sample(rng, negatives + 1, bursts.len()).into_vec();
    slots.sort_unstable();
    let mut labels = Vec::with_capacity(n);
    let mut next = 0;
    for gap in 0..=negatives {
        if next < slots.len() && slots[next] == gap {
            labels.extend(std::iter::repeat_n(true, bursts[next]));
            next += 1;
        }
        if gap < negatives {
            labels.push(false);
        }
    }
    labels
}

/// Two noisy features per sample: the current/next event indicator and a
/// look-ahead precursor `max(y_{i+1..i+window})`.
pub fn generate_temporal_dataset<T: Scalar>(cfg: &SyntheticSeriesConfig) -> Result<TemporalDataset<T>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let labels = burst_labels(&mut rng, cfg.n, cfg.event_rate);
    let y = |i: usize| if i < labels.len() && labels[i] { 1.0 } else { 0.0 };
    let features = (0..cfg.n)
        .map(|i| {
            let lead = (1..=cfg.window).map(|j| y(i + j)).fold(0.0, f64::max);
            let e0: f64 = StandardNormal.sample(&mut rng);
            let e1: f64 = StandardNormal.sample(&mut rng);
            vec![
                T::lit(cfg.signal * (0.6 * y(i) + 0.4 * y(i + 1)) + cfg.noise * e0),
                T::lit(cfg.signal * lead + cfg.noise * e1),
            ]
        })
        .collect();
    TemporalDataset::new(features, labels)
}

fn parse_label(raw: &str, row: usize) -> Result<bool> {
    match raw.trim() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(TrainError::Input(format!("row {row}: label must be 0/1, got {other:?}"))),
    }
}

/// Reads `f_1,…,f_m,label` (an optional `timestamp` column is ignored).
pub fn read_dataset_csv<T: Scalar, R: Read>(reader: R) -> Result<TemporalDataset<T>> {
    let err = |e: csv::Error| TrainError::Input(e.to_string());
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(err)?.clone();
    let label_col = headers
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| TrainError::Input("missing column \"label\"".into()))?;
    let feature_cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| *h != "label" && *h != "timestamp")
        .map(|(k, _)| k)
        .collect();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(err)?;
        labels.push(parse_label(&rec[label_col], row)?);
        features.push(
            feature_cols
                .iter()
                .map(|&c| {
                    rec[c]
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(T::lit)
                        .ok_or_else(|| TrainError::Input(format!("row {row}: bad feature {:?}", &rec[c])))
                })
                .collect::<Result<Vec<T>>>()?,
        );
    }
    TemporalDataset::new(features, labels)
}

pub fn write_dataset_csv<T: Scalar, W: Write>(writer: W, data: &TemporalDataset<T>) -> Result<()> {
    let err = |e: csv::Error| TrainError::Input(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=data.feature_dim()).map(|k| format!("x{k}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(err)?;
    for (x, &y) in data.features.iter().zip(&data.labels) {
        let mut rec: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        rec.push(if y { "1" } else { "0" }.into());
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| TrainError::Input(e.to_string()))
}
