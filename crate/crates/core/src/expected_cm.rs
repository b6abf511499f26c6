//! Closed-form expectations of the weighted confusion matrix over the
//! threshold prior.
//!
//! Averaging `1{ŷ > τ}` over τ gives `F(ŷ)`, so
//!
//! * `E[TN] = Σ (1 − y_i)(1 − F(ŷ_i))`, `E[TP] = Σ y_i F(ŷ_i)`;
//! * threshold-free weights factor out: `E[wFP] = Σ w_i (1 − y_i) F(ŷ_i)`;
//! * cross-entropy weights cancel the cdf under `Uniform(0, 1)`;
//! * value weights on false negatives depend on τ through past alarms. For
//!   `g = ω·z` every past prediction above `ŷ_i` contributes
//!   `ω_j D_i(j)` with `D_i(j) = max(F(ŷ_{i−j}) − F(ŷ_i), 0)`; for
//!   `g = max(ω ⊙ z)` only the chain of running maxima of the past
//!   predictions contributes, with telescoped weights `ω_{t_j} − ω_{t_{j+1}}`.
//!
//! All sums run in index order.

use serde::Serialize;

use crate::confusion::ConfusionEntries;
use crate::error::{Result, WsolError};
use crate::num::Scalar;
use crate::series::LabeledSeries;
use crate::threshold_dist::ThresholdDistribution;
use crate::weight_spec::{WeightKind, WeightSpec};

/// Threshold-averaged `(tn, wfp, wfn, tp)`.
pub type ExpectedConfusion<T> = ConfusionEntries<T>;

/// Non-empty power interval `I_j = [lower, upper)` of past lag `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerInterval<T> {
    /// Lag `j` (1-based: `ŷ_{i−j}`).
    pub lag: usize,
    pub lower: T,
    pub upper: T,
    /// Lag `k(j)` of the actual precursor, `None` when the lower end is `a`.
    pub precursor: Option<usize>,
}

/// Power intervals of a past window and its dominating chain `t_1..t_S`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerIntervalDecomposition<T> {
    /// Non-empty intervals in increasing lag order.
    pub intervals: Vec<PowerInterval<T>>,
    /// Chain lags `t_1 < t_2 < …`; predictions strictly increase along it.
    pub chain: Vec<usize>,
}

impl<T: Scalar> PowerIntervalDecomposition<T> {
    /// Chain length `S`.
    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    /// `I_j`, or `None` when it is empty.
    pub fn interval(&self, lag: usize) -> Option<&PowerInterval<T>> {
        self.intervals.iter().find(|iv| iv.lag == lag)
    }
}

/// Decomposes `[a, max past)` into power intervals.
///
/// `past[j − 1]` is `ŷ_{i−j}`. Every past prediction must lie in the open
/// support `(a, b)`. Under ties the smaller lag keeps the interval.
pub fn power_intervals<T: Scalar>(past: &[T], a: T, b: T) -> Result<PowerIntervalDecomposition<T>> {
    for (k, &p) in past.iter().enumerate() {
        if !(p > a && p < b) {
            return Err(WsolError::OutsideSupport {
                index: k,
                value: p.to_f64_lossy(),
                lower: a.to_f64_lossy(),
                upper: b.to_f64_lossy(),
            });
        }
    }
    Ok(decompose(past, a))
}

fn decompose<T: Scalar>(past: &[T], a: T) -> PowerIntervalDecomposition<T> {
    let mut intervals = Vec::new();
    let mut chain = Vec::new();
    let mut top = a;
    let mut top_lag = None;
    for (k, &p) in past.iter().enumerate() {
        if p > top {
            let lag = k + 1;
            intervals.push(PowerInterval {
                lag,
                lower: top,
                upper: p,
                precursor: top_lag,
            });
            chain.push(lag);
            top = p;
            top_lag = Some(lag);
        }
    }
    PowerIntervalDecomposition { intervals, chain }
}

/// Past window `(ŷ_{i−1}, …, ŷ_{i−T})`, truncated at the start of the record.
fn past_window<T: Scalar>(series: &LabeledSeries<T>, i: usize, window: usize) -> Vec<T> {
    (1..=window.min(i)).map(|j| series.prediction(i - j)).collect()
}

fn check_gating<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
    spec: &WeightSpec<T>,
) -> Result<()> {
    spec.check_series(series)?;
    if matches!(spec.kind(), WeightKind::CrossEntropy { .. }) && !dist.is_standard_uniform() {
        return Err(WsolError::UnsupportedCombination(
            "cross_entropy weights have a closed-form expectation only under the uniform(0, 1) threshold prior".into(),
        ));
    }
    if let WeightKind::ValueMax { omega } = spec.kind() {
        if !dist.is_full_support() {
            let (a, b) = dist.support();
            for i in (0..series.len()).filter(|&i| series.label(i)) {
                for j in 1..=omega.len().min(i) {
                    let p = series.prediction(i - j);
                    if !(p > a && p < b) {
                        return Err(WsolError::OutsideSupport {
                            index: i - j,
                            value: p.to_f64_lossy(),
                            lower: a.to_f64_lossy(),
                            upper: b.to_f64_lossy(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// `(E[TP], E[TN])`.
pub fn expected_tp_tn<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
) -> (T, T) {
    let mut tp = T::zero();
    let mut tn = T::zero();
    for (&p, &y) in series.predictions().iter().zip(series.labels()) {
        let f = dist.cdf(p);
        if y {
            tp = tp + f;
        } else {
            tn = tn + (T::one() - f);
        }
    }
    (tp, tn)
}

/// `W_P` of negative sample `i`.
fn fp_term<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
    spec: &WeightSpec<T>,
    i: usize,
) -> T {
    let p = series.prediction(i);
    match spec.kind() {
        WeightKind::CrossEntropy { omega0, .. } => -*omega0 * (T::one() - p).ln(),
        // threshold-free weights factor out of the integral
        _ => spec.fp_weight(series, i) * dist.cdf(p),
    }
}

/// `W_N` of positive sample `i`.
fn fn_term<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
    spec: &WeightSpec<T>,
    i: usize,
) -> T {
    let p = series.prediction(i);
    let miss = T::one() - dist.cdf(p);
    match spec.kind() {
        WeightKind::Unit => miss,
        WeightKind::Cost { c10, .. } => *c10 * miss,
        WeightKind::CrossEntropy { omega1, .. } => -*omega1 * p.ln(),
        WeightKind::ValueProd { omega } => {
            let fi = dist.cdf(p);
            let past = past_window(series, i, omega.len());
            let reward = past
                .iter()
                .zip(omega)
                .fold(T::zero(), |acc, (&q, &w)| acc + w * (dist.cdf(q) - fi).max(T::zero()));
            miss - reward
        }
        WeightKind::ValueMax { omega } => {
            let fi = dist.cdf(p);
            let past = past_window(series, i, omega.len());
            let (a, _) = dist.support();
            let chain = decompose(&past, a).chain;
            let mut reward = T::zero();
            for (j, &t) in chain.iter().enumerate() {
                let next = chain.get(j + 1).map_or(T::zero(), |&u| omega[u - 1]);
                let d = (dist.cdf(past[t - 1]) - fi).max(T::zero());
                reward = reward + (omega[t - 1] - next) * d;
            }
            miss - reward
        }
    }
}

/// `E[wFP]`.
pub fn expected_wfp<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
    spec: &WeightSpec<T>,
) -> Result<T> {
    check_gating(series, dist, spec)?;
    Ok(wfp_unchecked(series, dist, spec))
}

fn wfp_unchecked<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
    spec: &WeightSpec<T>,
) -> T {
    match spec.kind() {
        WeightKind::Unit => unit_fp(series, dist),
        // scaling the unit sum keeps the ratio exact
        WeightKind::Cost { c01, .. } => *c01 * unit_fp(series, dist),
        _ => (0..series.len())
            .filter(|&i| !series.label(i))
            .fold(T::zero(), |acc, i| acc + fp_term(series, dist, spec, i)),
    }
}

/// `E[wFN]`.
pub fn expected_wfn<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
    spec: &WeightSpec<T>,
) -> Result<T> {
    check_gating(series, dist, spec)?;
    Ok(wfn_unchecked(series, dist, spec))
}

fn wfn_unchecked<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
    spec: &WeightSpec<T>,
) -> T {
    match spec.kind() {
        WeightKind::Unit => unit_fn(series, dist),
        WeightKind::Cost { c10, .. } => *c10 * unit_fn(series, dist),
        _ => (0..series.len())
            .filter(|&i| series.label(i))
            .fold(T::zero(), |acc, i| acc + fn_term(series, dist, spec, i)),
    }
}

fn unit_fp<T: Scalar>(series: &LabeledSeries<T>, dist: &ThresholdDistribution<T>) -> T {
    (0..series.len())
        .filter(|&i| !series.label(i))
        .fold(T::zero(), |acc, i| acc + dist.cdf(series.prediction(i)))
}

fn unit_fn<T: Scalar>(series: &LabeledSeries<T>, dist: &ThresholdDistribution<T>) -> T {
    (0..series.len())
        .filter(|&i| series.label(i))
        .fold(T::zero(), |acc, i| acc + (T::one() - dist.cdf(series.prediction(i))))
}

/// All four expected entries.
pub fn expected_confusion<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
    spec: &WeightSpec<T>,
) -> Result<ExpectedConfusion<T>> {
    check_gating(series, dist, spec)?;
    let (tp, tn) = expected_tp_tn(series, dist);
    Ok(ConfusionEntries {
        tn,
        wfp: wfp_unchecked(series, dist, spec),
        wfn: wfn_unchecked(series, dist, spec),
        tp,
    })
}

/// Derivatives of each expected entry with respect to every prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryJacobian<T> {
    pub tn: Vec<T>,
    pub wfp: Vec<T>,
    pub wfn: Vec<T>,
    pub tp: Vec<T>,
    /// Indices where a one-sided derivative was taken (ties at kinks).
    pub kinks: Vec<usize>,
}

impl<T: Scalar> EntryJacobian<T> {
    fn zeros(n: usize) -> Self {
        Self {
            tn: vec![T::zero(); n],
            wfp: vec![T::zero(); n],
            wfn: vec![T::zero(); n],
            tp: vec![T::zero(); n],
            kinks: Vec::new(),
        }
    }

    /// Contracts with `(∂s/∂tn, ∂s/∂wfp, ∂s/∂wfn, ∂s/∂tp)`.
    pub fn contract(&self, partials: &[T; 4]) -> Vec<T> {
        (0..self.tn.len())
            .map(|k| {
                partials[0] * self.tn[k]
                    + partials[1] * self.wfp[k]
                    + partials[2] * self.wfn[k]
                    + partials[3] * self.tp[k]
            })
            .collect()
    }
}

/// Expected entries together with their prediction Jacobian.
///
/// Derivatives use `1{ŷ_{i−j} > ŷ_i}` literally, so at a tie the
/// derivative is one-sided and the index lands in `kinks`.
pub fn expected_confusion_with_jacobian<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
    spec: &WeightSpec<T>,
) -> Result<(ExpectedConfusion<T>, EntryJacobian<T>)> {
    let value = expected_confusion(series, dist, spec)?;
    let n = series.len();
    let mut jac = EntryJacobian::zeros(n);
    let (a, b) = dist.support();
    let one = T::one();

    for k in 0..n {
        let p = series.prediction(k);
        let f = dist.pdf(p);
        if !dist.is_full_support() && (p == a || p == b) {
            jac.kinks.push(k);
        }
        if series.label(k) {
            jac.tp[k] = f;
        } else {
            jac.tn[k] = -f;
            jac.wfp[k] = match spec.kind() {
                WeightKind::CrossEntropy { omega0, .. } => *omega0 / (one - p),
                _ => spec.fp_weight(series, k) * f,
            };
        }
    }

    for i in (0..n).filter(|&i| series.label(i)) {
        let p = series.prediction(i);
        let fi = dist.pdf(p);
        match spec.kind() {
            WeightKind::Unit => jac.wfn[i] = jac.wfn[i] - fi,
            WeightKind::Cost { c10, .. } => jac.wfn[i] = jac.wfn[i] - *c10 * fi,
            WeightKind::CrossEntropy { omega1, .. } => jac.wfn[i] = jac.wfn[i] - *omega1 / p,
            WeightKind::ValueProd { omega } => {
                let mut d_self = -fi;
                for (j, &w) in (1..=omega.len().min(i)).zip(omega) {
                    let q = series.prediction(i - j);
                    if q == p {
                        jac.kinks.push(i);
                    }
                    if q > p {
                        d_self = d_self + w * fi;
                        jac.wfn[i - j] = jac.wfn[i - j] - w * dist.pdf(q);
                    }
                }
                jac.wfn[i] = jac.wfn[i] + d_self;
            }
            WeightKind::ValueMax { omega } => {
                let past = past_window(series, i, omega.len());
                let chain = decompose(&past, a).chain;
                // a past value tying the running maximum sits on a chain switch
                let mut top = a;
                for (k, &q) in past.iter().enumerate() {
                    if q == top || q == p {
                        jac.kinks.push(i - (k + 1));
                        jac.kinks.push(i);
                    }
                    top = top.max(q);
                }
                let mut d_self = -fi;
                for (j, &t) in chain.iter().enumerate() {
                    let next = chain.get(j + 1).map_or(T::zero(), |&u| omega[u - 1]);
                    let coef = omega[t - 1] - next;
                    let q = past[t - 1];
                    if q > p {
                        d_self = d_self + coef * fi;
                        jac.wfn[i - t] = jac.wfn[i - t] - coef * dist.pdf(q);
                    }
                }
                jac.wfn[i] = jac.wfn[i] + d_self;
            }
        }
    }
    jac.kinks.sort_unstable();
    jac.kinks.dedup();
    Ok((value, jac))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> ThresholdDistribution<f64> {
        ThresholdDistribution::standard_uniform()
    }

    fn series(preds: &[f64], labels: &[u8]) -> LabeledSeries<f64> {
        LabeledSeries::from_binary(preds.to_vec(), labels).unwrap()
    }

    #[test]
    fn single_sample_examples() {
        let (tp, _) = expected_tp_tn(&series(&[0.7], &[1]), &uniform());
        assert!((tp - 0.7).abs() < 1e-15);
        let (_, tn) = expected_tp_tn(&series(&[0.7], &[0]), &uniform());
        assert!((tn - 0.3).abs() < 1e-15);
        let unit = WeightSpec::unit();
        let wfp = expected_wfp(&series(&[0.6], &[0]), &uniform(), &unit).unwrap();
        assert!((wfp - 0.6).abs() < 1e-15);
        let wfn = expected_wfn(&series(&[0.3], &[1]), &uniform(), &unit).unwrap();
        assert!((wfn - 0.7).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_example() {
        let ce = WeightSpec::cross_entropy(1.0, 1.0).unwrap();
        let v = expected_wfp(&series(&[0.5], &[0]), &uniform(), &ce).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
        let beta = ThresholdDistribution::beta(2.0, 2.0).unwrap();
        assert!(matches!(
            expected_wfp(&series(&[0.5], &[0]), &beta, &ce),
            Err(WsolError::UnsupportedCombination(_))
        ));
    }

    #[test]
    fn value_prod_worked_example() {
        // past (ŷ_{i−1}, ŷ_{i−2}) = (0.9, 0.2), ŷ_i = 0.5, ω = (0.4, 0.2)
        // 1 − 0.5 − 0.4·(0.9 − 0.5) − 0.2·0 = 0.34
        let s = series(&[0.2, 0.9, 0.5], &[0, 0, 1]);
        let spec = WeightSpec::value_prod(vec![0.4, 0.2]).unwrap();
        let v = expected_wfn(&s, &uniform(), &spec).unwrap();
        assert!((v - 0.34).abs() < 1e-15);
    }

    #[test]
    fn power_interval_examples() {
        let d = power_intervals(&[0.5, 0.6, 0.1, 0.8], 0.0, 1.0).unwrap();
        assert_eq!(d.chain, vec![1, 2, 4]);
        assert_eq!(
            d.intervals,
            vec![
                PowerInterval { lag: 1, lower: 0.0, upper: 0.5, precursor: None },
                PowerInterval { lag: 2, lower: 0.5, upper: 0.6, precursor: Some(1) },
                PowerInterval { lag: 4, lower: 0.6, upper: 0.8, precursor: Some(2) },
            ]
        );
        assert!(d.interval(3).is_none());

        let d = power_intervals(&[0.7, 0.2, 0.9, 0.3], 0.0, 1.0).unwrap();
        assert_eq!(d.chain, vec![1, 3]);
        assert_eq!(d.interval(3).unwrap().precursor, Some(1));
        assert!(d.interval(2).is_none() && d.interval(4).is_none());

        let d = power_intervals(&[0.42], 0.0, 1.0).unwrap();
        assert_eq!(d.chain, vec![1]);
        assert_eq!(d.intervals[0].upper, 0.42);
    }

    #[test]
    fn power_intervals_ties_keep_smaller_lag() {
        let d = power_intervals(&[0.5, 0.5, 0.7], 0.0, 1.0).unwrap();
        assert_eq!(d.chain, vec![1, 3]);
        assert_eq!(d.interval(3).unwrap().precursor, Some(1));
    }

    #[test]
    fn power_intervals_support_check() {
        assert!(matches!(
            power_intervals(&[0.5, 0.1], 0.2, 0.8),
            Err(WsolError::OutsideSupport { index: 1, .. })
        ));
        assert!(power_intervals(&[0.5, 0.8], 0.2, 0.8).is_err());
    }

    #[test]
    fn value_max_checks_assumption_under_restricted_prior() {
        let s = series(&[0.1, 0.5, 0.6], &[0, 0, 1]);
        let spec = WeightSpec::value_max(vec![0.5, 0.3]).unwrap();
        let d = ThresholdDistribution::uniform(0.2, 0.8).unwrap();
        assert!(matches!(
            expected_wfn(&s, &d, &spec),
            Err(WsolError::OutsideSupport { index: 0, .. })
        ));
        assert!(expected_wfn(&s, &uniform(), &spec).is_ok());
    }

    #[test]
    fn cost_scales_unit() {
        let s = series(&[0.2, 0.9, 0.5, 0.33, 0.71], &[0, 1, 1, 0, 1]);
        let unit = expected_confusion(&s, &uniform(), &WeightSpec::unit()).unwrap();
        let cost = expected_confusion(&s, &uniform(), &WeightSpec::cost(2.0, 3.0).unwrap()).unwrap();
        assert_eq!(cost.wfp, 2.0 * unit.wfp);
        assert_eq!(cost.wfn, 3.0 * unit.wfn);
        assert_eq!((cost.tn, cost.tp), (unit.tn, unit.tp));
    }

    #[test]
    fn unordered_series_rejected_for_value_weights() {
        let s = series(&[0.2, 0.9], &[0, 1]).unordered();
        let spec = WeightSpec::value_prod(vec![0.3]).unwrap();
        assert_eq!(
            expected_confusion(&s, &uniform(), &spec).unwrap_err(),
            WsolError::NotChronological
        );
    }
}
