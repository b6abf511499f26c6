//! Hard (fixed-threshold) confusion matrices.
//!
//! A prediction equal to the threshold counts as a negative prediction,
//! following `1{x > τ} = 0` for `x <= τ`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WsolError};
use crate::num::Scalar;
use crate::series::LabeledSeries;
use crate::weight_spec::WeightSpec;

/// Classical confusion-matrix counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tp: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tn + self.fp + self.fn_ + self.tp
    }

    pub fn entries<T: Scalar>(&self) -> ConfusionEntries<T> {
        ConfusionEntries {
            tn: T::count(self.tn),
            wfp: T::count(self.fp),
            wfn: T::count(self.fn_),
            tp: T::count(self.tp),
        }
    }
}

/// Confusion matrix with weighted error entries.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WeightedCounts<T> {
    pub tn: usize,
    pub wfp: T,
    pub wfn: T,
    pub tp: usize,
}

impl<T: Scalar> WeightedCounts<T> {
    pub fn entries(&self) -> ConfusionEntries<T> {
        ConfusionEntries {
            tn: T::count(self.tn),
            wfp: self.wfp,
            wfn: self.wfn,
            tp: T::count(self.tp),
        }
    }
}

/// Real-valued `(tn, wfp, wfn, tp)`: the common input of every score.
///
/// Produced by hard counts, weighted counts and threshold expectations alike.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConfusionEntries<T> {
    pub tn: T,
    pub wfp: T,
    pub wfn: T,
    pub tp: T,
}

impl<T: Scalar> ConfusionEntries<T> {
    pub fn new(tn: T, wfp: T, wfn: T, tp: T) -> Self {
        Self { tn, wfp, wfn, tp }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    /// Entries in `(tn, wfp, wfn, tp)` order.
    pub fn to_array(&self) -> [T; 4] {
        [self.tn, self.wfp, self.wfn, self.tp]
    }

    pub fn from_array(a: [T; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::new(f(self.tn), f(self.wfp), f(self.wfn), f(self.tp))
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self::new(
            f(self.tn, other.tn),
            f(self.wfp, other.wfp),
            f(self.wfn, other.wfn),
            f(self.tp, other.tp),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, k: T) -> Self {
        self.map(|v| v * k)
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let d = self.zip_with(other, |a, b| (a - b).abs());
        d.tn.max(d.wfp).max(d.wfn).max(d.tp)
    }
}

fn check_tau<T: Scalar>(tau: T) -> Result<()> {
    if tau > T::zero() && tau < T::one() {
        Ok(())
    } else {
        Err(WsolError::ThresholdOutOfRange(tau.to_f64_lossy()))
    }
}

/// Classical confusion matrix at threshold `tau ∈ (0, 1)`.
pub fn hard_confusion<T: Scalar>(series: &LabeledSeries<T>, tau: T) -> Result<ConfusionCounts> {
    check_tau(tau)?;
    let mut cm = ConfusionCounts::default();
    for (&p, &y) in series.predictions().iter().zip(series.labels()) {
        match (y, p > tau) {
            (false, false) => cm.tn += 1,
            (false, true) => cm.fp += 1,
            (true, false) => cm.fn_ += 1,
            (true, true) => cm.tp += 1,
        }
    }
    Ok(cm)
}

/// Weighted confusion matrix at threshold `tau ∈ (0, 1)`.
pub fn weighted_hard_confusion<T: Scalar>(
    series: &LabeledSeries<T>,
    tau: T,
    weights: &WeightSpec<T>,
) -> Result<WeightedCounts<T>> {
    check_tau(tau)?;
    weights.check_series(series)?;
    Ok(weighted_counts_unchecked(series, tau, weights))
}

/// Weighted counts without argument validation; `tau` may be any real.
pub(crate) fn weighted_counts_unchecked<T: Scalar>(
    series: &LabeledSeries<T>,
    tau: T,
    weights: &WeightSpec<T>,
) -> WeightedCounts<T> {
    let mut cm = WeightedCounts {
        tn: 0,
        wfp: T::zero(),
        wfn: T::zero(),
        tp: 0,
    };
    for i in 0..series.len() {
        let alarm = series.prediction(i) > tau;
        match (series.label(i), alarm) {
            (false, false) => cm.tn += 1,
            (false, true) => cm.wfp = cm.wfp + weights.fp_weight(series, i),
            (true, false) => cm.wfn = cm.wfn + weights.fn_weight(series, i, tau),
            (true, true) => cm.tp += 1,
        }
    }
    cm
}
