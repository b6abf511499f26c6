//! One-versus-rest extension: one expected weighted confusion matrix per
//! class, each with its own threshold prior, aggregated into a global score.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WsolError};
use crate::loss::{loss_with_gradient, LossSpec};
use crate::num::Scalar;
use crate::scores::{apply_score, ScoreKind, ScoreValue};
use crate::series::LabeledSeries;
use crate::threshold_dist::ThresholdDistribution;
use crate::weight_spec::WeightSpec;

/// `n × d` labels and predictions; a sample may be positive in several
/// classes.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilabelSeries<T: Scalar> {
    columns: Vec<LabeledSeries<T>>,
}

impl<T: Scalar> MultilabelSeries<T> {
    /// Builds from row-major `labels[i][j]` and `predictions[i][j]`.
    pub fn from_rows(labels: &[Vec<bool>], predictions: &[Vec<T>]) -> Result<Self> {
        if labels.len() != predictions.len() {
            return Err(WsolError::LengthMismatch {
                predictions: predictions.len(),
                labels: labels.len(),
            });
        }
        let d = labels.first().map_or(0, Vec::len);
        if labels.iter().any(|r| r.len() != d) || predictions.iter().any(|r| r.len() != d) {
            return Err(WsolError::Input("ragged multilabel rows".into()));
        }
        let columns = (0..d)
            .map(|j| {
                LabeledSeries::new(
                    predictions.iter().map(|r| r[j]).collect(),
                    labels.iter().map(|r| r[j]).collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_columns(columns)
    }

    /// One binary series per class; all columns must share length and
    /// ordering flag.
    pub fn from_columns(columns: Vec<LabeledSeries<T>>) -> Result<Self> {
        if columns.len() < 2 {
            return Err(WsolError::InvalidArgument(format!(
                "multilabel data needs at least 2 classes, got {}",
                columns.len()
            )));
        }
        let n = columns[0].len();
        let chrono = columns[0].is_chronological();
        if columns
            .iter()
            .any(|c| c.len() != n || c.is_chronological() != chrono)
        {
            return Err(WsolError::Input(
                "multilabel columns differ in length or ordering".into(),
            ));
        }
        Ok(Self { columns })
    }

    pub fn classes(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns[0].is_empty()
    }

    pub fn column(&self, j: usize) -> &LabeledSeries<T> {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[LabeledSeries<T>] {
        &self.columns
    }
}

/// Aggregator `μ` of the per-class scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Aggregator<T> {
    Mean,
    WeightedMean { weights: Vec<T> },
    Min,
}

/// Prior and weight function of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct ClassSpec<T: Scalar> {
    #[serde(default)]
    pub distribution: ThresholdDistribution<T>,
    #[serde(default)]
    pub weights: WeightSpec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct MultilabelSpec<T: Scalar> {
    pub classes: Vec<ClassSpec<T>>,
    pub score: ScoreKind,
    pub aggregator: Aggregator<T>,
}

impl<T: Scalar> MultilabelSpec<T> {
    /// Same prior and weights for all `d` classes.
    pub fn uniform_classes(
        d: usize,
        dist: ThresholdDistribution<T>,
        weights: WeightSpec<T>,
        score: ScoreKind,
        aggregator: Aggregator<T>,
    ) -> Self {
        Self {
            classes: vec![
                ClassSpec {
                    distribution: dist,
                    weights,
                };
                d
            ],
            score,
            aggregator,
        }
    }

    fn validate(&self, data: &MultilabelSeries<T>) -> Result<()> {
        let d = self.classes.len();
        if d < 2 {
            return Err(WsolError::InvalidArgument(format!(
                "multilabel spec needs d >= 2 classes, got {d}"
            )));
        }
        if d != data.classes() {
            return Err(WsolError::InvalidArgument(format!(
                "spec has {d} classes, data has {}",
                data.classes()
            )));
        }
        if let Aggregator::WeightedMean { weights } = &self.aggregator {
            if weights.len() != d {
                return Err(WsolError::InvalidArgument(format!(
                    "weighted mean needs {d} weights, got {}",
                    weights.len()
                )));
            }
            if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
                return Err(WsolError::InvalidArgument(
                    "aggregator weights must be non-negative".into(),
                ));
            }
            let sum = weights.iter().fold(T::zero(), |a, w| a + *w);
            if (sum - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::count(d)) {
                return Err(WsolError::InvalidArgument(format!(
                    "aggregator weights sum to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    fn class_loss(&self, j: usize) -> LossSpec<T> {
        LossSpec::new(
            self.score,
            self.classes[j].weights.clone(),
            self.classes[j].distribution,
        )
    }
}

/// Aggregated score with its per-class inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalScore<T> {
    pub value: T,
    pub per_class: Vec<ScoreValue<T>>,
    /// Some class hit a zero denominator.
    pub degenerate: bool,
}

/// `S = μ(s(E_{τ_1}[wCM_1]), …, s(E_{τ_d}[wCM_d]))`.
pub fn multilabel_global_score<T: Scalar>(
    data: &MultilabelSeries<T>,
    spec: &MultilabelSpec<T>,
) -> Result<GlobalScore<T>> {
    spec.validate(data)?;
    let per_class = (0..data.classes())
        .map(|j| {
            let cm = spec.class_loss(j).expected(data.column(j))?;
            Ok(apply_score(spec.score, &cm))
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<T> = per_class.iter().map(|s| s.value).collect();
    let (value, _) = aggregate(&spec.aggregator, &values);
    Ok(GlobalScore {
        value,
        degenerate: per_class.iter().any(|s| s.degenerate),
        per_class,
    })
}

/// Aggregated value and `∂μ/∂s_j`; the bool reports a tie for `Min`.
fn aggregate<T: Scalar>(agg: &Aggregator<T>, values: &[T]) -> (T, (Vec<T>, bool)) {
    let d = values.len();
    match agg {
        Aggregator::Mean => {
            let inv = T::count(d).recip();
            let sum = values.iter().fold(T::zero(), |a, v| a + *v);
            (sum * inv, (vec![inv; d], false))
        }
        Aggregator::WeightedMean { weights } => {
            let v = values
                .iter()
                .zip(weights)
                .fold(T::zero(), |a, (v, w)| a + *v * *w);
            (v, (weights.clone(), false))
        }
        Aggregator::Min => {
            let (arg, min) = values
                .iter()
                .copied()
                .enumerate()
                .fold((0, values[0]), |best, (j, v)| if v < best.1 { (j, v) } else { best });
            let tie = values.iter().filter(|&&v| v == min).count() > 1;
            let mut dmu = vec![T::zero(); d];
            dmu[arg] = T::one();
            (min, (dmu, tie))
        }
    }
}

/// Multilabel loss `−S` and its gradient over all `n × d` predictions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultilabelLoss<T> {
    pub value: T,
    /// `gradient[j][i] = ∂ℓ/∂ŷ_{i,j}`.
    pub gradient: Vec<Vec<T>>,
    /// `(class, sample)` pairs where a one-sided derivative was used.
    pub kinks: Vec<(usize, usize)>,
    /// `μ = min` with several classes attaining the minimum.
    pub min_tie: bool,
    pub degenerate: bool,
}

pub fn multilabel_wsol<T: Scalar>(
    data: &MultilabelSeries<T>,
    spec: &MultilabelSpec<T>,
) -> Result<MultilabelLoss<T>> {
    spec.validate(data)?;
    let d = data.classes();
    let n = data.len();
    let mut scores = Vec::with_capacity(d);
    let mut grads = Vec::with_capacity(d);
    let mut kinks = Vec::new();
    let mut degenerate = false;
    for j in 0..d {
        let column = data.column(j);
        let loss_spec = spec.class_loss(j);
        match loss_with_gradient(column, &loss_spec) {
            Ok((v, g)) => {
                degenerate |= v.degenerate;
                scores.push(-v.value);
                // ∂s_j/∂ŷ = −∂ℓ_j/∂ŷ
                grads.push(g.values.into_iter().map(|x| -x).collect::<Vec<T>>());
                kinks.extend(g.kinks.into_iter().map(|i| (j, i)));
            }
            Err(WsolError::DegenerateDenominator(_)) => {
                // score is pinned to 0 on the degenerate set
                degenerate = true;
                scores.push(T::zero());
                grads.push(vec![T::zero(); n]);
            }
            Err(e) => return Err(e),
        }
    }
    let (value, (dmu, min_tie)) = aggregate(&spec.aggregator, &scores);
    let gradient = grads
        .into_iter()
        .zip(dmu)
        .map(|(g, w)| g.into_iter().map(|x| -(w * x)).collect())
        .collect();
    Ok(MultilabelLoss {
        value: -value,
        gradient,
        kinks,
        min_tie,
        degenerate,
    })
}
