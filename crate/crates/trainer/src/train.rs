//! Gradient descent on a weighted score-oriented loss, with the loss
//! gradient over predictions pushed through the network by backprop.

use serde::{Deserialize, Serialize};
use wsol_core::{
    apply_score, combined_loss, hard_confusion, loss_value, weighted_hard_confusion, CombinedLossSpec,
    ConfusionEntries, LabeledSeries, LossValue, ScoreKind, Scalar, SweepReport, ThresholdSweep, WeightSpec,
    WsolError,
};

use crate::data::TemporalDataset;
use crate::error::{Result, TrainError};
use crate::model::Mlp;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Full batch, or contiguous chronological chunks with the boundary
/// policy applied inside each chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Batching {
    #[default]
    Full,
    Chunks { size: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig<T: Scalar> {
    pub epochs: usize,
    pub learning_rate: T,
    pub batching: Batching,
    pub optimizer: Optimizer,
    pub loss: CombinedLossSpec<T>,
    /// Weights of the weighted scores recorded in the history.
    pub eval_weights: WeightSpec<T>,
}

impl<T: Scalar> TrainConfig<T> {
    pub fn new(loss: CombinedLossSpec<T>) -> Self {
        Self {
            epochs: 300,
            learning_rate: T::lit(0.01),
            batching: Batching::Full,
            optimizer: Optimizer::default(),
            loss,
            eval_weights: default_eval_weights(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= T::zero()) {
            return Err(TrainError::InvalidConfig("learning rate must be finite and >= 0".into()));
        }
        if let Batching::Chunks { size: 0 } = self.batching {
            return Err(TrainError::InvalidConfig("chunk size must be >= 1".into()));
        }
        if let Optimizer::Adam { beta1, beta2, eps } = self.optimizer {
            let ok = (0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && eps > 0.0;
            if !ok {
                return Err(TrainError::InvalidConfig("adam needs betas in [0, 1) and eps > 0".into()));
            }
        }
        Ok(())
    }

    /// β-weighted mean of the component priors' means.
    pub fn report_threshold(&self) -> T {
        self.loss
            .components()
            .iter()
            .fold(T::zero(), |acc, c| acc + c.beta * c.spec.dist.mean())
    }
}

/// `ValueMax(0.6, 0.3, 0.1)`.
pub fn default_eval_weights<T: Scalar>() -> WeightSpec<T> {
    WeightSpec::value_max(vec![T::lit(0.6), T::lit(0.3), T::lit(0.1)]).expect("valid default weights")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores<T> {
    pub accuracy: T,
    pub f1: T,
    pub tss: T,
    pub hss: T,
}

impl<T: Scalar> Scores<T> {
    fn of(m: &ConfusionEntries<T>) -> Self {
        Self {
            accuracy: apply_score(ScoreKind::Accuracy, m).value,
            f1: apply_score(ScoreKind::F1, m).value,
            tss: apply_score(ScoreKind::Tss, m).value,
            hss: apply_score(ScoreKind::Hss, m).value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRecord<T> {
    pub epoch: usize,
    pub loss: T,
    pub classical: Scores<T>,
    pub weighted: Scores<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct History<T> {
    pub threshold: T,
    pub epochs: Vec<EpochRecord<T>>,
}

impl<T: Scalar> History<T> {
    pub fn last(&self) -> Option<&EpochRecord<T>> {
        self.epochs.last()
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("epoch,loss,accuracy,f1,tss,hss,w_accuracy,w_f1,w_tss,w_hss\n");
        for r in &self.epochs {
            let (c, w) = (&r.classical, &r.weighted);
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.epoch, r.loss, c.accuracy, c.f1, c.tss, c.hss, w.accuracy, w.f1, w.tss, w.hss
            ));
        }
        out
    }
}

/// Classical and weighted scores of hard predictions at `tau`.
pub fn scores_at<T: Scalar>(
    series: &LabeledSeries<T>,
    tau: T,
    weights: &WeightSpec<T>,
) -> Result<(Scores<T>, Scores<T>)> {
    let classical = hard_confusion(series, tau)?.entries();
    let weighted = weighted_hard_confusion(series, tau, weights)?.entries();
    Ok((Scores::of(&classical), Scores::of(&weighted)))
}

fn combined_value<T: Scalar>(series: &LabeledSeries<T>, loss: &CombinedLossSpec<T>) -> Result<T> {
    loss.components().iter().try_fold(T::zero(), |acc, c| {
        Ok(acc + c.beta * loss_value(series, &c.spec)?.value)
    })
}

/// Loss over the whole dataset and its gradient over the flat parameters.
pub fn loss_and_param_gradient<T: Scalar>(
    model: &Mlp<T>,
    data: &TemporalDataset<T>,
    loss: &CombinedLossSpec<T>,
) -> Result<(LossValue<T>, Vec<T>)> {
    loss_on(model, &data.features, &data.labels, loss)
}

fn loss_on<T: Scalar>(
    model: &Mlp<T>,
    features: &[Vec<T>],
    labels: &[bool],
    loss: &CombinedLossSpec<T>,
) -> Result<(LossValue<T>, Vec<T>)> {
    let series = LabeledSeries::new(model.predict(features)?, labels.to_vec())?;
    let (value, grad) = combined_loss(&series, loss)?;
    Ok((value, model.backward(features, &grad.values)?))
}

struct Stepper<T> {
    kind: Optimizer,
    lr: T,
    t: i32,
    m: Vec<T>,
    v: Vec<T>,
}

impl<T: Scalar> Stepper<T> {
    fn new(kind: Optimizer, lr: T, n: usize) -> Self {
        Self {
            kind,
            lr,
            t: 0,
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
        }
    }

    fn step(&mut self, params: &mut [T], grad: &[T]) {
        match self.kind {
            Optimizer::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p = *p - self.lr * *g;
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                self.t += 1;
                let (b1, b2, eps) = (T::lit(beta1), T::lit(beta2), T::lit(eps));
                let c1 = T::one() - b1.powi(self.t);
                let c2 = T::one() - b2.powi(self.t);
                for k in 0..params.len() {
                    let g = grad[k];
                    self.m[k] = b1 * self.m[k] + (T::one() - b1) * g;
                    self.v[k] = b2 * self.v[k] + (T::one() - b2) * g * g;
                    let mh = self.m[k] / c1;
                    let vh = self.v[k] / c2;
                    params[k] = params[k] - self.lr * mh / (vh.sqrt() + eps);
                }
            }
        }
    }
}

fn chunks(n: usize, batching: Batching) -> Vec<std::ops::Range<usize>> {
    match batching {
        Batching::Full => vec![0..n],
        Batching::Chunks { size } => (0..n).step_by(size).map(|s| s..(s + size).min(n)).collect(),
    }
}

/// Trains `model` in place of a copy; returns it with the per-epoch history.
///
/// Chunks whose score has a zero denominator (e.g. no positives) are
/// skipped for that epoch.
pub fn train<T: Scalar>(
    model: &Mlp<T>,
    data: &TemporalDataset<T>,
    cfg: &TrainConfig<T>,
) -> Result<(Mlp<T>, History<T>)> {
    cfg.validate()?;
    if data.feature_dim() != model.inputs() {
        return Err(TrainError::Input(format!(
            "model expects {} features, data has {}",
            model.inputs(),
            data.feature_dim()
        )));
    }
    let mut model = model.clone();
    let mut params = model.params();
    let mut stepper = Stepper::new(cfg.optimizer, cfg.learning_rate, params.len());
    let tau = cfg.report_threshold();
    let ranges = chunks(data.len(), cfg.batching);
    let mut history = History {
        threshold: tau,
        epochs: Vec::with_capacity(cfg.epochs),
    };
    for epoch in 1..=cfg.epochs {
        for r in &ranges {
            match loss_on(&model, &data.features[r.clone()], &data.labels[r.clone()], &cfg.loss) {
                Ok((value, grad)) => {
                    if !value.value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                        return Err(TrainError::Diverged {
                            epoch,
                            loss: value.value.to_f64_lossy(),
                        });
                    }
                    stepper.step(&mut params, &grad);
                    if params.iter().any(|p| !p.is_finite()) {
                        return Err(TrainError::Diverged {
                            epoch,
                            loss: value.value.to_f64_lossy(),
                        });
                    }
                    model.set_params(&params)?;
                }
                Err(TrainError::Core(WsolError::DegenerateDenominator(_))) => continue,
                Err(e) => return Err(e),
            }
        }
        let series = data.series(model.predict(&data.features)?)?;
        let loss = combined_value(&series, &cfg.loss)?;
        if !loss.is_finite() || params.iter().any(|p| !p.is_finite()) {
            return Err(TrainError::Diverged {
                epoch,
                loss: loss.to_f64_lossy(),
            });
        }
        let (classical, weighted) = scores_at(&series, tau, &cfg.eval_weights)?;
        history.epochs.push(EpochRecord {
            epoch,
            loss,
            classical,
            weighted,
        });
    }
    Ok((model, history))
}

/// Threshold sweep of a model's predictions on `data`.
pub fn evaluate<T: Scalar>(
    model: &Mlp<T>,
    data: &TemporalDataset<T>,
    sweep: &ThresholdSweep<T>,
    weights: &WeightSpec<T>,
) -> Result<SweepReport<T>> {
    let series = data.series(model.predict(&data.features)?)?;
    Ok(wsol_core::sweep_report(&series, sweep, weights)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_temporal_dataset, SyntheticSeriesConfig};
    use crate::model::Activation;
    use wsol_core::{LossSpec, ThresholdDistribution};

    fn ce() -> CombinedLossSpec<f64> {
        CombinedLossSpec::single(LossSpec::cross_entropy(1.0, 1.0).unwrap())
    }

    fn small_data() -> TemporalDataset<f64> {
        generate_temporal_dataset(&SyntheticSeriesConfig { n: 60, seed: 1, ..Default::default() }).unwrap()
    }

    #[test]
    fn zero_learning_rate_keeps_weights() {
        let data = small_data();
        let model = Mlp::new(&[2, 4, 1], Activation::Tanh, 3).unwrap();
        let cfg = TrainConfig { epochs: 5, learning_rate: 0.0, ..TrainConfig::new(ce()) };
        let (trained, hist) = train(&model, &data, &cfg).unwrap();
        assert_eq!(trained, model);
        assert!(hist.epochs.windows(2).all(|w| w[0].loss == w[1].loss && w[0].weighted == w[1].weighted));
    }

    #[test]
    fn separable_data_reaches_full_accuracy() {
        let xs: Vec<Vec<f64>> = (0..40).map(|i| vec![if i % 3 == 0 { 1.0 } else { -1.0 }, (i as f64 * 0.37).sin()]).collect();
        let ys: Vec<bool> = (0..40).map(|i| i % 3 == 0).collect();
        let data = TemporalDataset::new(xs, ys).unwrap();
        let model = Mlp::new(&[2, 4, 1], Activation::Tanh, 0).unwrap();
        let cfg = TrainConfig { epochs: 200, learning_rate: 0.05, ..TrainConfig::new(ce()) };
        let (_, hist) = train(&model, &data, &cfg).unwrap();
        assert_eq!(hist.last().unwrap().classical.accuracy, 1.0);
    }

    #[test]
    fn training_is_reproducible() {
        let data = small_data();
        let model = Mlp::new(&[2, 5, 1], Activation::Tanh, 8).unwrap();
        let loss = CombinedLossSpec::single(LossSpec::new(
            ScoreKind::Tss,
            default_eval_weights(),
            ThresholdDistribution::standard_uniform(),
        ));
        let cfg = TrainConfig { epochs: 20, ..TrainConfig::new(loss) };
        let a = train(&model, &data, &cfg).unwrap();
        let b = train(&model, &data, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1.to_csv(), b.1.to_csv());
    }

    #[test]
    fn chunked_training_runs() {
        let data = small_data();
        let model = Mlp::new(&[2, 3, 1], Activation::Sigmoid, 1).unwrap();
        let loss = CombinedLossSpec::single(LossSpec::new(
            ScoreKind::F1,
            default_eval_weights(),
            ThresholdDistribution::standard_uniform(),
        ));
        let cfg = TrainConfig {
            epochs: 3,
            batching: Batching::Chunks { size: 7 },
            optimizer: Optimizer::Sgd,
            ..TrainConfig::new(loss)
        };
        let (_, hist) = train(&model, &data, &cfg).unwrap();
        assert_eq!(hist.epochs.len(), 3);
        assert_eq!(chunks(10, Batching::Chunks { size: 4 }), vec![0..4, 4..8, 8..10]);
    }

    #[test]
    fn divergence_reports_epoch() {
        let data = small_data();
        let model = Mlp::new(&[2, 3, 1], Activation::Tanh, 1).unwrap();
        let cfg = TrainConfig { epochs: 50, learning_rate: 1e308, ..TrainConfig::new(ce()) };
        match train(&model, &data, &cfg) {
            Err(TrainError::Diverged { epoch, .. }) => assert!(epoch >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn report_row_matches_hard_confusion() {
        let data = small_data();
        let model = Mlp::new(&[2, 3, 1], Activation::Tanh, 2).unwrap();
        let report = evaluate(&model, &data, &ThresholdSweep::default(), &default_eval_weights()).unwrap();
        let series = data.series(model.predict(&data.features).unwrap()).unwrap();
        assert_eq!(report.row(0.5).unwrap().classical, hard_confusion(&series, 0.5).unwrap());
        assert_eq!(report.rows.len(), 99);
    }
}
