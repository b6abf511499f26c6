//! Two 26-sample alarm series with the same confusion matrix at τ = 0.5:
//! series A misses by one step around events, series B makes isolated
//! errors far from events.

use serde::Serialize;

use crate::confusion::{hard_confusion, weighted_hard_confusion, ConfusionCounts, ConfusionEntries};
use crate::error::Result;
use crate::num::Scalar;
use crate::oracle::exact_expected_confusion;
use crate::report::ScoreRow;
use crate::series::LabeledSeries;
use crate::threshold_dist::ThresholdDistribution;
use crate::weight_spec::WeightSpec;

pub const DEMO_LEN: usize = 26;
pub const DEMO_THRESHOLD: f64 = 0.5;
const EVENTS: [usize; 7] = [4, 5, 6, 12, 13, 20, 21];
const ALARMS_A: [usize; 9] = [3, 4, 5, 11, 12, 18, 19, 20, 21];
const ALARMS_B: [usize; 9] = [0, 5, 6, 8, 13, 16, 20, 21, 24];
const ALARM: f64 = 0.8;
const QUIET: f64 = 0.2;

/// Default value weights of the demonstration.
pub fn demo_weights<T: Scalar>() -> WeightSpec<T> {
    WeightSpec::value_max(vec![T::lit(0.6), T::lit(0.3), T::lit(0.1)]).expect("valid demo weights")
}

fn build<T: Scalar>(alarms: &[usize]) -> LabeledSeries<T> {
    let preds = (0..DEMO_LEN)
        .map(|i| T::lit(if alarms.contains(&i) { ALARM } else { QUIET }))
        .collect();
    let labels = (0..DEMO_LEN).map(|i| EVENTS.contains(&i)).collect();
    LabeledSeries::new(preds, labels).expect("valid demo series")
}

/// Errors adjacent to events.
pub fn series_a<T: Scalar>() -> LabeledSeries<T> {
    build(&ALARMS_A)
}

/// Isolated errors.
pub fn series_b<T: Scalar>() -> LabeledSeries<T> {
    build(&ALARMS_B)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoSide<T> {
    pub classical: ConfusionCounts,
    pub weighted: ConfusionEntries<T>,
    /// Threshold-averaged weighted matrix under the standard uniform prior.
    pub expected_weighted: ConfusionEntries<T>,
    pub classical_scores: ScoreRow<T>,
    pub weighted_scores: ScoreRow<T>,
    pub expected_weighted_scores: ScoreRow<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoComparison<T> {
    pub threshold: T,
    pub a: DemoSide<T>,
    pub b: DemoSide<T>,
}

fn side<T: Scalar>(series: &LabeledSeries<T>, weights: &WeightSpec<T>) -> Result<DemoSide<T>> {
    let tau = T::lit(DEMO_THRESHOLD);
    let classical = hard_confusion(series, tau)?;
    let weighted = weighted_hard_confusion(series, tau, weights)?.entries();
    let expected_weighted =
        exact_expected_confusion(series, &ThresholdDistribution::standard_uniform(), weights)?;
    Ok(DemoSide {
        classical_scores: ScoreRow::from_entries(&classical.entries()),
        weighted_scores: ScoreRow::from_entries(&weighted),
        expected_weighted_scores: ScoreRow::from_entries(&expected_weighted),
        classical,
        weighted,
        expected_weighted,
    })
}

/// Classical vs weighted scores of both series.
pub fn compare<T: Scalar>(weights: &WeightSpec<T>) -> Result<DemoComparison<T>> {
    Ok(DemoComparison {
        threshold: T::lit(DEMO_THRESHOLD),
        a: side(&series_a(), weights)?,
        b: side(&series_b(), weights)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expected_cm::expected_confusion;
    use crate::scores::ScoreKind;

    #[test]
    fn same_classical_matrix() {
        let c = compare::<f64>(&demo_weights()).unwrap();
        let want = ConfusionCounts { tn: 15, fp: 4, fn_: 2, tp: 5 };
        assert_eq!(c.a.classical, want);
        assert_eq!(c.b.classical, want);
        assert_eq!(c.a.classical_scores, c.b.classical_scores);
        let a = series_a::<f64>();
        assert_eq!(a.positives(), 7);
        assert_eq!(a.predictions().iter().filter(|&&p| p > 0.5).count(), 9);
    }

    #[test]
    fn adjacent_errors_score_higher() {
        let c = compare::<f64>(&demo_weights()).unwrap();
        assert!((c.a.weighted.wfp - 1.9).abs() < 1e-12);
        assert!((c.a.weighted.wfn - 0.8).abs() < 1e-12);
        assert!((c.b.weighted.wfp - 4.0).abs() < 1e-12);
        assert!((c.b.weighted.wfn - 2.0).abs() < 1e-12);
        for k in [ScoreKind::Accuracy, ScoreKind::F1, ScoreKind::Tss, ScoreKind::Hss] {
            assert!(c.a.weighted_scores.get(k).value > c.b.weighted_scores.get(k).value, "{k}");
            assert!(
                c.a.expected_weighted_scores.get(k).value > c.b.expected_weighted_scores.get(k).value,
                "{k}"
            );
        }
    }

    #[test]
    fn closed_form_agrees_with_exact_oracle() {
        let w = demo_weights::<f64>();
        for s in [series_a(), series_b()] {
            let closed = expected_confusion(&s, &ThresholdDistribution::standard_uniform(), &w).unwrap();
            let exact = exact_expected_confusion(&s, &ThresholdDistribution::standard_uniform(), &w).unwrap();
            assert!(closed.max_abs_diff(&exact) < 1e-12);
        }
    }
}
