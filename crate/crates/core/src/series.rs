//! Batches of (prediction, label) pairs.

use serde::Serialize;

use crate::error::{Result, WsolError};
use crate::num::{indicator, Scalar};

/// Ordered batch of predictions in `(0, 1)` with binary labels.
///
/// When `chronological` is set, index order is time order; value-weighted
/// paths look at neighbouring samples and refuse unordered batches.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct LabeledSeries<T: Scalar> {
    predictions: Vec<T>,
    labels: Vec<bool>,
    chronological: bool,
}

impl<T: Scalar> LabeledSeries<T> {
    /// Builds a chronological series, validating every entry.
    pub fn new(predictions: Vec<T>, labels: Vec<bool>) -> Result<Self> {
        if predictions.len() != labels.len() {
            return Err(WsolError::LengthMismatch {
                predictions: predictions.len(),
                labels: labels.len(),
            });
        }
        if predictions.is_empty() {
            return Err(WsolError::EmptySeries);
        }
        check_predictions(&predictions)?;
        Ok(Self {
            predictions,
            labels,
            chronological: true,
        })
    }

    /// Like [`Self::new`] but with integer labels that must be 0 or 1.
    pub fn from_binary(predictions: Vec<T>, labels: &[u8]) -> Result<Self> {
        let labels = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| match y {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(WsolError::Input(format!(
                    "label {other} at index {i} is not 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(predictions, labels)
    }

    /// Marks the series as having no meaningful order.
    pub fn unordered(mut self) -> Self {
        self.chronological = false;
        self
    }

    pub fn with_chronological(mut self, chronological: bool) -> Self {
        self.chronological = chronological;
        self
    }

    /// Same labels and ordering flag, new predictions.
    pub fn with_predictions(&self, predictions: Vec<T>) -> Result<Self> {
        if predictions.len() != self.labels.len() {
            return Err(WsolError::LengthMismatch {
                predictions: predictions.len(),
                labels: self.labels.len(),
            });
        }
        check_predictions(&predictions)?;
        Ok(Self {
            predictions,
            labels: self.labels.clone(),
            chronological: self.chronological,
        })
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    /// Always false: empty series are rejected at construction.
    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    pub fn predictions(&self) -> &[T] {
        &self.predictions
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    #[inline]
    pub fn prediction(&self, i: usize) -> T {
        self.predictions[i]
    }

    #[inline]
    pub fn label(&self, i: usize) -> bool {
        self.labels[i]
    }

    /// Label as 0/1 scalar.
    #[inline]
    pub fn y(&self, i: usize) -> T {
        indicator(self.labels[i])
    }

    pub fn is_chronological(&self) -> bool {
        self.chronological
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }
}

fn check_predictions<T: Scalar>(predictions: &[T]) -> Result<()> {
    for (index, &p) in predictions.iter().enumerate() {
        if !(p > T::zero() && p < T::one()) {
            return Err(WsolError::PredictionOutOfRange {
                index,
                value: p.to_f64_lossy(),
            });
        }
    }
    Ok(())
}
