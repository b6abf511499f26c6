//! Weight functions applied to false positives and false negatives.
//!
//! Every variant reads only the arguments it needs from the full
//! `(τ, y_i, ŷ_i, batch, y_i^+, 1_i^-)` signature:
//!
//! * `Unit` and `Cost` depend on the label only.
//! * `CrossEntropy` depends on the label and the sample's own prediction.
//! * `ValueProd` / `ValueMax` reward errors close in time to events: a false
//!   positive looks at the next `T` labels, a false negative at alarms raised
//!   among the previous `T` predictions (which makes it depend on τ).

use serde::{Deserialize, Serialize};

use crate::error::{Result, WsolError};
use crate::num::Scalar;
use crate::series::LabeledSeries;

/// Built-in weight function variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightKind<T> {
    Unit,
    Cost { c01: T, c10: T },
    CrossEntropy { omega0: T, omega1: T },
    ValueProd { omega: Vec<T> },
    ValueMax { omega: Vec<T> },
}

/// Validated weight function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightKind<T>", into = "WeightKind<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct WeightSpec<T: Scalar> {
    kind: WeightKind<T>,
}

impl<T: Scalar> TryFrom<WeightKind<T>> for WeightSpec<T> {
    type Error = WsolError;

    fn try_from(kind: WeightKind<T>) -> Result<Self> {
        match kind {
            WeightKind::Unit => Ok(Self::unit()),
            WeightKind::Cost { c01, c10 } => Self::cost(c01, c10),
            WeightKind::CrossEntropy { omega0, omega1 } => Self::cross_entropy(omega0, omega1),
            WeightKind::ValueProd { omega } => Self::value_prod(omega),
            WeightKind::ValueMax { omega } => Self::value_max(omega),
        }
    }
}

impl<T: Scalar> From<WeightSpec<T>> for WeightKind<T> {
    fn from(spec: WeightSpec<T>) -> Self {
        spec.kind
    }
}

impl<T: Scalar> Default for WeightSpec<T> {
    fn default() -> Self {
        Self::unit()
    }
}

impl<T: Scalar> WeightSpec<T> {
    pub fn unit() -> Self {
        Self {
            kind: WeightKind::Unit,
        }
    }

    /// Cost-sensitive weight `(1 − y) c01 + y c10`.
    pub fn cost(c01: T, c10: T) -> Result<Self> {
        if !(c01.is_finite() && c10.is_finite()) || c01 < T::zero() || c10 < T::zero() {
            return Err(WsolError::InvalidWeights(format!(
                "costs must be finite and non-negative, got c01={c01}, c10={c10}"
            )));
        }
        Ok(Self {
            kind: WeightKind::Cost { c01, c10 },
        })
    }

    pub fn cross_entropy(omega0: T, omega1: T) -> Result<Self> {
        if !(omega0.is_finite() && omega1.is_finite()) || omega0 <= T::zero() || omega1 <= T::zero()
        {
            return Err(WsolError::InvalidWeights(format!(
                "cross-entropy weights must be positive, got omega0={omega0}, omega1={omega1}"
            )));
        }
        Ok(Self {
            kind: WeightKind::CrossEntropy { omega0, omega1 },
        })
    }

    /// `g(z) = ω·z`; requires non-increasing ω ≥ 0 with ‖ω‖₁ < 1.
    pub fn value_prod(omega: Vec<T>) -> Result<Self> {
        check_window(&omega)?;
        let l1: T = omega.iter().copied().sum();
        if l1 >= T::one() {
            return Err(WsolError::InvalidWeights(format!(
                "value_prod needs sum(omega) < 1, got {l1}"
            )));
        }
        Ok(Self {
            kind: WeightKind::ValueProd { omega },
        })
    }

    /// `g(z) = max(ω ⊙ z)`; requires non-increasing ω ≥ 0 with max ω < 1.
    pub fn value_max(omega: Vec<T>) -> Result<Self> {
        check_window(&omega)?;
        if omega[0] >= T::one() {
            return Err(WsolError::InvalidWeights(format!(
                "value_max needs max(omega) < 1, got {}",
                omega[0]
            )));
        }
        Ok(Self {
            kind: WeightKind::ValueMax { omega },
        })
    }

    pub fn kind(&self) -> &WeightKind<T> {
        &self.kind
    }

    /// Window length `T` (0 for variants without windows).
    pub fn window(&self) -> usize {
        self.omega().map_or(0, <[T]>::len)
    }

    pub fn omega(&self) -> Option<&[T]> {
        match &self.kind {
            WeightKind::ValueProd { omega } | WeightKind::ValueMax { omega } => Some(omega),
            _ => None,
        }
    }

    pub fn is_value(&self) -> bool {
        self.omega().is_some()
    }

    /// Rejects unordered series for value variants.
    pub fn check_series(&self, series: &LabeledSeries<T>) -> Result<()> {
        if self.is_value() && !series.is_chronological() {
            return Err(WsolError::NotChronological);
        }
        Ok(())
    }

    /// Weight of sample `i` at threshold `tau`.
    ///
    /// Negatives get their false-positive weight, positives their
    /// false-negative weight.
    pub fn eval(&self, tau: T, i: usize, series: &LabeledSeries<T>) -> Result<T> {
        self.check_series(series)?;
        if i >= series.len() {
            return Err(WsolError::InvalidArgument(format!(
                "index {i} out of range for series of length {}",
                series.len()
            )));
        }
        Ok(if series.label(i) {
            self.fn_weight(series, i, tau)
        } else {
            self.fp_weight(series, i)
        })
    }

    /// False-positive weight of sample `i` (never depends on τ).
    pub(crate) fn fp_weight(&self, series: &LabeledSeries<T>, i: usize) -> T {
        match &self.kind {
            WeightKind::Unit => T::one(),
            WeightKind::Cost { c01, .. } => *c01,
            WeightKind::CrossEntropy { omega0, .. } => {
                let p = series.prediction(i);
                -*omega0 * (T::one() - p).ln() / p
            }
            WeightKind::ValueProd { omega } => {
                T::one() - g_prod(omega, future_labels_iter(series, i, omega.len()))
            }
            WeightKind::ValueMax { omega } => {
                T::one() - g_max(omega, future_labels_iter(series, i, omega.len()))
            }
        }
    }

    /// False-negative weight of sample `i` at threshold `tau`.
    pub(crate) fn fn_weight(&self, series: &LabeledSeries<T>, i: usize, tau: T) -> T {
        match &self.kind {
            WeightKind::Unit => T::one(),
            WeightKind::Cost { c10, .. } => *c10,
            WeightKind::CrossEntropy { omega1, .. } => {
                let p = series.prediction(i);
                -*omega1 * p.ln() / (T::one() - p)
            }
            WeightKind::ValueProd { omega } => {
                T::one() - g_prod(omega, past_alarms_iter(series, i, tau, omega.len()))
            }
            WeightKind::ValueMax { omega } => {
                T::one() - g_max(omega, past_alarms_iter(series, i, tau, omega.len()))
            }
        }
    }
}

fn check_window<T: Scalar>(omega: &[T]) -> Result<()> {
    if omega.is_empty() {
        return Err(WsolError::InvalidWeights("window length must be >= 1".into()));
    }
    if omega.iter().any(|w| !w.is_finite() || *w < T::zero()) {
        return Err(WsolError::InvalidWeights(
            "omega entries must be finite and non-negative".into(),
        ));
    }
    if omega.windows(2).any(|w| w[1] > w[0]) {
        return Err(WsolError::InvalidWeights(
            "omega must be non-increasing with the lag".into(),
        ));
    }
    Ok(())
}

/// `ω · z`
pub fn g_prod<T: Scalar>(omega: &[T], z: impl IntoIterator<Item = bool>) -> T {
    omega
        .iter()
        .zip(z)
        .filter(|(_, on)| *on)
        .fold(T::zero(), |acc, (w, _)| acc + *w)
}

/// `max(ω ⊙ z)`, 0 when no entry is on.
pub fn g_max<T: Scalar>(omega: &[T], z: impl IntoIterator<Item = bool>) -> T {
    omega
        .iter()
        .zip(z)
        .filter(|(_, on)| *on)
        .fold(T::zero(), |acc, (w, _)| acc.max(*w))
}

fn future_labels_iter<T: Scalar>(
    series: &LabeledSeries<T>,
    i: usize,
    window: usize,
) -> impl Iterator<Item = bool> + '_ {
    let n = series.len();
    (1..=window).map(move |j| i + j < n && series.label(i + j))
}

fn past_alarms_iter<T: Scalar>(
    series: &LabeledSeries<T>,
    i: usize,
    tau: T,
    window: usize,
) -> impl Iterator<Item = bool> + '_ {
    (1..=window).map(move |j| j <= i && series.prediction(i - j) > tau)
}

/// `y_i^+ = (y_{i+1}, …, y_{i+T})`, padded with 0 past the end of the record.
pub fn future_labels<T: Scalar>(series: &LabeledSeries<T>, i: usize, window: usize) -> Vec<bool> {
    future_labels_iter(series, i, window).collect()
}

/// `1_i^- = (1{ŷ_{i−1} > τ}, …, 1{ŷ_{i−T} > τ})`, padded with 0 before the
/// start of the record.
pub fn past_alarms<T: Scalar>(
    series: &LabeledSeries<T>,
    i: usize,
    tau: T,
    window: usize,
) -> Vec<bool> {
    past_alarms_iter(series, i, tau, window).collect()
}

/// Free-function form of [`WeightSpec::eval`].
pub fn eval_weight<T: Scalar>(
    spec: &WeightSpec<T>,
    tau: T,
    i: usize,
    series: &LabeledSeries<T>,
) -> Result<T> {
    spec.eval(tau, i, series)
}
