//! Ground-truth engines for the closed forms: exact piecewise integration
//! over the threshold and Monte Carlo sampling of it.
//!
//! Every τ-dependence of a weighted confusion matrix enters through
//! indicators `1{ŷ > τ}`, so as a function of τ the matrix is constant
//! between consecutive prediction values. Integrating such a function
//! against the prior reduces to evaluating it once inside each
//! sub-interval and weighting by the prior mass `F(hi) − F(lo)`. The
//! midpoint evaluation below is therefore exact up to the accuracy of the
//! cdf, and shares nothing with the closed-form algebra.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::confusion::{weighted_counts_unchecked, ConfusionEntries};
use crate::error::{Result, WsolError};
use crate::expected_cm::ExpectedConfusion;
use crate::loss::{loss_value, LossSpec};
use crate::num::Scalar;
use crate::scores::{apply_score, ScoreKind};
use crate::series::LabeledSeries;
use crate::threshold_dist::ThresholdDistribution;
use crate::weight_spec::WeightSpec;

/// Minimum number of Monte Carlo draws.
pub const MIN_MC_SAMPLES: usize = 1_000;

/// Fixed shard count: results do not depend on the thread pool size.
const MC_SHARDS: u64 = 16;

/// Sorted, de-duplicated breakpoints clipped to the support.
fn breakpoints<T: Scalar>(points: impl IntoIterator<Item = T>, a: T, b: T) -> Vec<T> {
    let mut cuts: Vec<T> = points
        .into_iter()
        .filter(|&p| p > a && p < b)
        .chain([a, b])
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    cuts.dedup();
    cuts
}

/// Exact `E_τ[wCM(τ)]` by piecewise integration.
pub fn exact_expected_confusion<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
    spec: &WeightSpec<T>,
) -> Result<ExpectedConfusion<T>> {
    spec.check_series(series)?;
    let n = series.len();
    let window = spec.window();
    let (a, b) = dist.support();
    let two = T::lit(2.0);
    let mut out = ConfusionEntries::zero();

    for i in 0..n {
        let lo_idx = i.saturating_sub(window);
        let hi_idx = (i + window).min(n - 1);
        let cuts = breakpoints(
            (lo_idx..=hi_idx).map(|k| series.prediction(k)),
            a,
            b,
        );
        let p = series.prediction(i);
        for seg in cuts.windows(2) {
            let mass = dist.cdf(seg[1]) - dist.cdf(seg[0]);
            if mass == T::zero() {
                continue;
            }
            let mid = (seg[0] + seg[1]) / two;
            let alarm = p > mid;
            match (series.label(i), alarm) {
                (false, false) => out.tn = out.tn + mass,
                (false, true) => out.wfp = out.wfp + spec.eval(mid, i, series)? * mass,
                (true, false) => out.wfn = out.wfn + spec.eval(mid, i, series)? * mass,
                (true, true) => out.tp = out.tp + mass,
            }
        }
    }
    Ok(out)
}

/// Exact `E_τ[s(wCM(τ))]`, plus the prior mass of thresholds at which the
/// score hit a zero denominator.
pub fn exact_expected_score<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
    spec: &WeightSpec<T>,
    score: ScoreKind,
) -> Result<(T, T)> {
    spec.check_series(series)?;
    let (a, b) = dist.support();
    let cuts = breakpoints(series.predictions().iter().copied(), a, b);
    let two = T::lit(2.0);
    let mut total = T::zero();
    let mut degenerate = T::zero();
    for seg in cuts.windows(2) {
        let mass = dist.cdf(seg[1]) - dist.cdf(seg[0]);
        if mass == T::zero() {
            continue;
        }
        let mid = (seg[0] + seg[1]) / two;
        let cm = weighted_counts_unchecked(series, mid, spec);
        let s = apply_score(score, &cm.entries());
        if s.degenerate {
            degenerate = degenerate + mass;
        }
        total = total + s.value * mass;
    }
    Ok((total, degenerate))
}

/// Monte Carlo estimate of the expected confusion entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfusion<T> {
    pub mean: ExpectedConfusion<T>,
    pub std_error: ConfusionEntries<T>,
    pub samples: usize,
}

/// Monte Carlo estimate of `E_τ[s(wCM(τ))]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McScore<T> {
    pub mean: T,
    pub std_error: T,
    pub samples: usize,
    pub degenerate_draws: usize,
}

/// Running mean / second moment (Welford), mergeable across shards.
#[derive(Debug, Clone, Copy)]
struct Moments<T, const K: usize> {
    count: usize,
    mean: [T; K],
    m2: [T; K],
}

impl<T: Scalar, const K: usize> Moments<T, K> {
    fn new() -> Self {
        Self {
            count: 0,
            mean: [T::zero(); K],
            m2: [T::zero(); K],
        }
    }

    fn push(&mut self, x: [T; K]) {
        self.count += 1;
        let n = T::count(self.count);
        for k in 0..K {
            let delta = x[k] - self.mean[k];
            self.mean[k] = self.mean[k] + delta / n;
            self.m2[k] = self.m2[k] + delta * (x[k] - self.mean[k]);
        }
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let (na, nb, n) = (T::count(self.count), T::count(other.count), T::count(count));
        let mut out = Self {
            count,
            ..Self::new()
        };
        for k in 0..K {
            let delta = other.mean[k] - self.mean[k];
            out.mean[k] = self.mean[k] + delta * nb / n;
            out.m2[k] = self.m2[k] + other.m2[k] + delta * delta * na * nb / n;
        }
        out
    }

    /// Standard error of the mean from the unbiased sample variance.
    fn std_error(&self) -> [T; K] {
        let mut out = [T::zero(); K];
        if self.count < 2 {
            return out;
        }
        let n = T::count(self.count);
        for k in 0..K {
            out[k] = (self.m2[k] / (n - T::one()) / n).sqrt();
        }
        out
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_MC_SAMPLES {
        return Err(WsolError::InvalidArgument(format!(
            "Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {samples}"
        )));
    }
    Ok(())
}

/// Runs `draw` over `samples` thresholds split into fixed shards, each with
/// its own ChaCha stream derived from `seed`; merges shards in order.
fn sharded<T, const K: usize>(
    dist: &ThresholdDistribution<T>,
    samples: usize,
    seed: u64,
    draw: impl Fn(T) -> [T; K] + Sync,
) -> Moments<T, K>
where
    T: Scalar,
{
    let per = samples as u64 / MC_SHARDS;
    let extra = samples as u64 % MC_SHARDS;
    (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let count = per + u64::from(shard < extra);
            let mut m = Moments::new();
            for _ in 0..count {
                m.push(draw(dist.sample(&mut rng)));
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::new(), Moments::merge)
}

/// Mean of hard weighted confusion matrices over i.i.d. threshold draws.
pub fn mc_expected_confusion<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
    spec: &WeightSpec<T>,
    samples: usize,
    seed: u64,
) -> Result<McConfusion<T>> {
    check_samples(samples)?;
    spec.check_series(series)?;
    let m = sharded(dist, samples, seed, |tau| {
        weighted_counts_unchecked(series, tau, spec)
            .entries()
            .to_array()
    });
    Ok(McConfusion {
        mean: ConfusionEntries::from_array(m.mean),
        std_error: ConfusionEntries::from_array(m.std_error()),
        samples,
    })
}

/// Mean score of hard weighted confusion matrices over threshold draws.
pub fn mc_expected_score<T: Scalar>(
    series: &LabeledSeries<T>,
    dist: &ThresholdDistribution<T>,
    spec: &WeightSpec<T>,
    score: ScoreKind,
    samples: usize,
    seed: u64,
) -> Result<McScore<T>> {
    check_samples(samples)?;
    spec.check_series(series)?;
    let m = sharded(dist, samples, seed, |tau| {
        let s = apply_score(score, &weighted_counts_unchecked(series, tau, spec).entries());
        [s.value, if s.degenerate { T::one() } else { T::zero() }]
    });
    let degenerate = (m.mean[1] * T::count(m.count)).round();
    Ok(McScore {
        mean: m.mean[0],
        std_error: m.std_error()[0],
        samples,
        degenerate_draws: degenerate.to_usize().unwrap_or(0),
    })
}

/// Central-difference gradient of the loss with respect to predictions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdGradient<T> {
    pub values: Vec<T>,
    /// Entries whose stencil had to be clamped to stay inside (0, 1).
    pub clamped: Vec<bool>,
}

/// Central differences of [`loss_value`] per prediction, step in `[1e-8, 1e-3]`.
pub fn finite_diff_gradient<T: Scalar>(
    series: &LabeledSeries<T>,
    spec: &LossSpec<T>,
    step: T,
) -> Result<FdGradient<T>> {
    if !(step >= T::lit(1e-8) && step <= T::lit(1e-3)) {
        return Err(WsolError::InvalidArgument(format!(
            "finite-difference step {step} outside [1e-8, 1e-3]"
        )));
    }
    let margin = T::epsilon().sqrt();
    let lo = margin;
    let hi = T::one() - margin;
    let base = series.predictions().to_vec();
    let mut values = Vec::with_capacity(base.len());
    let mut clamped = Vec::with_capacity(base.len());
    for k in 0..base.len() {
        let up = (base[k] + step).min(hi);
        let dn = (base[k] - step).max(lo);
        clamped.push(up != base[k] + step || dn != base[k] - step);
        let mut preds = base.clone();
        preds[k] = up;
        let f_up = loss_value(&series.with_predictions(preds.clone())?, spec)?.value;
        preds[k] = dn;
        let f_dn = loss_value(&series.with_predictions(preds)?, spec)?.value;
        values.push((f_up - f_dn) / (up - dn));
    }
    Ok(FdGradient { values, clamped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expected_cm::expected_confusion;

    fn series(preds: &[f64], labels: &[u8]) -> LabeledSeries<f64> {
        LabeledSeries::from_binary(preds.to_vec(), labels).unwrap()
    }

    #[test]
    fn exact_matches_unit_closed_form() {
        let s = series(&[0.2, 0.9, 0.5, 0.33, 0.71, 0.05], &[0, 1, 1, 0, 1, 0]);
        for dist in [
            ThresholdDistribution::standard_uniform(),
            ThresholdDistribution::beta(2.0, 5.0).unwrap(),
            ThresholdDistribution::uniform(0.1, 0.6).unwrap(),
        ] {
            let exact = exact_expected_confusion(&s, &dist, &WeightSpec::unit()).unwrap();
            let closed = expected_confusion(&s, &dist, &WeightSpec::unit()).unwrap();
            assert!(exact.max_abs_diff(&closed) < 1e-12, "{dist:?}");
        }
    }

    #[test]
    fn exact_handles_repeated_predictions() {
        let s = series(&[0.4; 5], &[1, 0, 1, 1, 0]);
        let spec = WeightSpec::value_max(vec![0.5, 0.2]).unwrap();
        let dist = ThresholdDistribution::standard_uniform();
        let exact = exact_expected_confusion(&s, &dist, &spec).unwrap();
        let closed = expected_confusion(&s, &dist, &spec).unwrap();
        assert!(exact.max_abs_diff(&closed) < 1e-12);
    }

    #[test]
    fn mc_single_sample() {
        let s = series(&[0.7], &[1]);
        let dist = ThresholdDistribution::standard_uniform();
        let mc = mc_expected_confusion(&s, &dist, &WeightSpec::unit(), 1_000_000, 3).unwrap();
        assert!((mc.mean.tp - 0.7).abs() < 3.0 * mc.std_error.tp);
        // Bernoulli(0.7) standard error
        let se = (0.7_f64 * 0.3 / 1e6).sqrt();
        assert!((mc.std_error.tp - se).abs() < 1e-5);
    }

    #[test]
    fn mc_is_deterministic() {
        let s = series(&[0.2, 0.9, 0.5, 0.33], &[0, 1, 1, 0]);
        let dist = ThresholdDistribution::beta(2.0, 2.0).unwrap();
        let spec = WeightSpec::value_prod(vec![0.3, 0.2]).unwrap();
        let a = mc_expected_confusion(&s, &dist, &spec, 5_000, 17).unwrap();
        let b = mc_expected_confusion(&s, &dist, &spec, 5_000, 17).unwrap();
        assert_eq!(a, b);
        let c = mc_expected_confusion(&s, &dist, &spec, 5_000, 18).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn mc_rejects_small_sample_counts() {
        let s = series(&[0.2], &[0]);
        let dist = ThresholdDistribution::standard_uniform();
        assert!(mc_expected_confusion(&s, &dist, &WeightSpec::unit(), 999, 0).is_err());
    }

    #[test]
    fn perfect_classifier_tss_every_draw() {
        let s = series(&[0.05, 0.1, 0.92, 0.97], &[0, 0, 1, 1]);
        let dist = ThresholdDistribution::uniform(0.2, 0.8).unwrap();
        let mc = mc_expected_score(&s, &dist, &WeightSpec::unit(), ScoreKind::Tss, 2_000, 1).unwrap();
        assert_eq!(mc.mean, 1.0);
        assert_eq!(mc.std_error, 0.0);
        assert_eq!(mc.degenerate_draws, 0);
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|k| ((k * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::<f64, 1>::new();
        xs.iter().for_each(|&x| whole.push([x]));
        let mut left = Moments::<f64, 1>::new();
        let mut right = Moments::<f64, 1>::new();
        xs[..300].iter().for_each(|&x| left.push([x]));
        xs[300..].iter().for_each(|&x| right.push([x]));
        let merged = left.merge(right);
        assert!((merged.mean[0] - whole.mean[0]).abs() < 1e-12);
        assert!((merged.m2[0] - whole.m2[0]).abs() < 1e-8);
    }
}
