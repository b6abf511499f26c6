//! Weighted score-oriented losses: `ℓ = −s(E_τ[wCM])`.
//!
//! Gradients are taken with respect to the predictions; composing them
//! with a model Jacobian is left to the caller.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WsolError};
use crate::expected_cm::{expected_confusion, expected_confusion_with_jacobian, ExpectedConfusion};
use crate::num::Scalar;
use crate::oracle::{exact_expected_score, mc_expected_score};
use crate::scores::{apply_score, score_partials, ScoreKind};
use crate::series::LabeledSeries;
use crate::threshold_dist::ThresholdDistribution;
use crate::weight_spec::WeightSpec;

/// Score, weight function and threshold prior of one loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct LossSpec<T: Scalar> {
    pub score: ScoreKind,
    #[serde(default)]
    pub weights: WeightSpec<T>,
    #[serde(default, rename = "distribution")]
    pub dist: ThresholdDistribution<T>,
}

impl<T: Scalar> LossSpec<T> {
    pub fn new(score: ScoreKind, weights: WeightSpec<T>, dist: ThresholdDistribution<T>) -> Self {
        Self {
            score,
            weights,
            dist,
        }
    }

    /// Weighted cross entropy expressed as a wSOL.
    pub fn cross_entropy(omega0: T, omega1: T) -> Result<Self> {
        Ok(Self::new(
            ScoreKind::NegErrorSum,
            WeightSpec::cross_entropy(omega0, omega1)?,
            ThresholdDistribution::standard_uniform(),
        ))
    }

    pub fn expected(&self, series: &LabeledSeries<T>) -> Result<ExpectedConfusion<T>> {
        expected_confusion(series, &self.dist, &self.weights)
    }
}

/// Loss value with the score's zero-denominator flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossValue<T> {
    pub value: T,
    pub degenerate: bool,
}

/// `∂ℓ/∂ŷ_i` for every sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientVector<T> {
    pub values: Vec<T>,
    /// Samples where a one-sided derivative was returned.
    pub kinks: Vec<usize>,
}

impl<T: Scalar> GradientVector<T> {
    pub fn is_smooth(&self) -> bool {
        self.kinks.is_empty()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn loss_value<T: Scalar>(series: &LabeledSeries<T>, spec: &LossSpec<T>) -> Result<LossValue<T>> {
    let cm = spec.expected(series)?;
    let s = apply_score(spec.score, &cm);
    Ok(LossValue {
        value: -s.value,
        degenerate: s.degenerate,
    })
}

/// Analytic gradient `−Σ_e (∂s/∂e)(∂e/∂ŷ_i)`.
pub fn loss_gradient<T: Scalar>(
    series: &LabeledSeries<T>,
    spec: &LossSpec<T>,
) -> Result<GradientVector<T>> {
    Ok(loss_with_gradient(series, spec)?.1)
}

/// Value and gradient from a single pass over the closed forms.
pub fn loss_with_gradient<T: Scalar>(
    series: &LabeledSeries<T>,
    spec: &LossSpec<T>,
) -> Result<(LossValue<T>, GradientVector<T>)> {
    let (cm, jac) = expected_confusion_with_jacobian(series, &spec.dist, &spec.weights)?;
    let s = apply_score(spec.score, &cm);
    let partials = score_partials(spec.score, &cm)?;
    let values = jac.contract(&partials).into_iter().map(|g| -g).collect();
    Ok((
        LossValue {
            value: -s.value,
            degenerate: s.degenerate,
        },
        GradientVector {
            values,
            kinks: jac.kinks,
        },
    ))
}

/// One term of a convex combination of losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawComponent<T>", into = "RawComponent<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct LossComponent<T: Scalar> {
    pub beta: T,
    pub spec: LossSpec<T>,
}

// flat on-disk form: {"beta": .., "score": .., "weights": .., "distribution": ..}
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
struct RawComponent<T: Scalar> {
    beta: T,
    score: ScoreKind,
    #[serde(default)]
    weights: WeightSpec<T>,
    #[serde(default)]
    distribution: ThresholdDistribution<T>,
}

impl<T: Scalar> From<RawComponent<T>> for LossComponent<T> {
    fn from(raw: RawComponent<T>) -> Self {
        Self {
            beta: raw.beta,
            spec: LossSpec::new(raw.score, raw.weights, raw.distribution),
        }
    }
}

impl<T: Scalar> From<LossComponent<T>> for RawComponent<T> {
    fn from(c: LossComponent<T>) -> Self {
        Self {
            beta: c.beta,
            score: c.spec.score,
            weights: c.spec.weights,
            distribution: c.spec.dist,
        }
    }
}

/// `Σ β_k ℓ_k` with `β ≥ 0`, `Σ β = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCombined<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct CombinedLossSpec<T: Scalar> {
    components: Vec<LossComponent<T>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
struct RawCombined<T: Scalar> {
    components: Vec<LossComponent<T>>,
}

impl<T: Scalar> TryFrom<RawCombined<T>> for CombinedLossSpec<T> {
    type Error = WsolError;

    fn try_from(raw: RawCombined<T>) -> Result<Self> {
        Self::new(raw.components)
    }
}

/// On-disk loss: either one spec or `{"components": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub enum LossConfig<T: Scalar> {
    Combined(CombinedLossSpec<T>),
    Single(LossSpec<T>),
}

impl<T: Scalar> LossConfig<T> {
    pub fn into_combined(self) -> CombinedLossSpec<T> {
        match self {
            Self::Combined(c) => c,
            Self::Single(s) => CombinedLossSpec::single(s),
        }
    }
}

impl<T: Scalar> From<LossConfig<T>> for CombinedLossSpec<T> {
    fn from(c: LossConfig<T>) -> Self {
        c.into_combined()
    }
}

const BETA_SUM_TOL: f64 = 1e-12;

impl<T: Scalar> CombinedLossSpec<T> {
    pub fn new(components: Vec<LossComponent<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(WsolError::InvalidLoss("no loss components".into()));
        }
        if components
            .iter()
            .any(|c| !c.beta.is_finite() || c.beta < T::zero())
        {
            return Err(WsolError::InvalidLoss("betas must be non-negative".into()));
        }
        let sum = components.iter().fold(T::zero(), |acc, c| acc + c.beta);
        if (sum - T::one()).abs() > T::lit(BETA_SUM_TOL).max(T::epsilon() * T::count(components.len())) {
            return Err(WsolError::InvalidLoss(format!("betas sum to {sum}, expected 1")));
        }
        Ok(Self { components })
    }

    pub fn single(spec: LossSpec<T>) -> Self {
        Self {
            components: vec![LossComponent {
                beta: T::one(),
                spec,
            }],
        }
    }

    pub fn components(&self) -> &[LossComponent<T>] {
        &self.components
    }

    /// True when any component uses value weights.
    pub fn uses_value_weights(&self) -> bool {
        self.components.iter().any(|c| c.spec.weights.is_value())
    }
}

/// Convex combination of component values and gradients.
pub fn combined_loss<T: Scalar>(
    series: &LabeledSeries<T>,
    spec: &CombinedLossSpec<T>,
) -> Result<(LossValue<T>, GradientVector<T>)> {
    let n = series.len();
    let mut value = T::zero();
    let mut degenerate = false;
    let mut grad = vec![T::zero(); n];
    let mut kinks = Vec::new();
    for c in &spec.components {
        let (v, g) = loss_with_gradient(series, &c.spec)?;
        value = value + c.beta * v.value;
        degenerate |= v.degenerate;
        for (acc, gk) in grad.iter_mut().zip(&g.values) {
            *acc = *acc + c.beta * *gk;
        }
        kinks.extend(g.kinks);
    }
    kinks.sort_unstable();
    kinks.dedup();
    Ok((
        LossValue { value, degenerate },
        GradientVector {
            values: grad,
            kinks,
        },
    ))
}

/// Both sides of `s(E[wCM]) ≈ E[s(wCM)]` and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreGap<T> {
    /// `s(E_τ[wCM])`, i.e. `−ℓ`.
    pub lhs: T,
    /// `E_τ[s(wCM)]`.
    pub rhs: T,
    /// Standard error of `rhs` (0 for the exact route).
    pub rhs_std_error: T,
    /// `lhs − rhs`.
    pub gap: T,
}

/// Score-of-expectation vs expectation-of-score, with a Monte Carlo `rhs`.
pub fn expected_score_gap<T: Scalar>(
    series: &LabeledSeries<T>,
    spec: &LossSpec<T>,
    mc_samples: usize,
    seed: u64,
) -> Result<ScoreGap<T>> {
    let lhs = apply_score(spec.score, &spec.expected(series)?).value;
    let mc = mc_expected_score(series, &spec.dist, &spec.weights, spec.score, mc_samples, seed)?;
    Ok(ScoreGap {
        lhs,
        rhs: mc.mean,
        rhs_std_error: mc.std_error,
        gap: lhs - mc.mean,
    })
}

/// Same as [`expected_score_gap`] with `rhs` from exact piecewise integration.
pub fn exact_score_gap<T: Scalar>(
    series: &LabeledSeries<T>,
    spec: &LossSpec<T>,
) -> Result<ScoreGap<T>> {
    let lhs = apply_score(spec.score, &spec.expected(series)?).value;
    let (rhs, _) = exact_expected_score(series, &spec.dist, &spec.weights, spec.score)?;
    Ok(ScoreGap {
        lhs,
        rhs,
        rhs_std_error: T::zero(),
        gap: lhs - rhs,
    })
}
