//! Threshold sweeps: hard classical and weighted confusion matrices and
//! every score at each threshold, with the best threshold per score.

use rayon::prelude::*;
use serde::Serialize;

use crate::confusion::{hard_confusion, weighted_hard_confusion, ConfusionCounts, ConfusionEntries};
use crate::error::{Result, WsolError};
use crate::num::Scalar;
use crate::scores::{apply_score, ScoreKind, ScoreValue};
use crate::series::LabeledSeries;
use crate::weight_spec::WeightSpec;

/// Ordered set of thresholds in (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdSweep<T> {
    thresholds: Vec<T>,
}

impl<T: Scalar> ThresholdSweep<T> {
    pub fn new(thresholds: Vec<T>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(WsolError::InvalidArgument("empty threshold sweep".into()));
        }
        if let Some(t) = thresholds
            .iter()
            .find(|t| !(**t > T::zero() && **t < T::one()))
        {
            return Err(WsolError::ThresholdOutOfRange(t.to_f64_lossy()));
        }
        Ok(Self { thresholds })
    }

    /// `k / steps` for `k = 1..steps`; `steps = 100` gives 0.01, …, 0.99.
    pub fn grid(steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(WsolError::InvalidArgument(format!(
                "grid needs at least 2 steps, got {steps}"
            )));
        }
        Self::new((1..steps).map(|k| T::count(k) / T::count(steps)).collect())
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }
}

impl<T: Scalar> Default for ThresholdSweep<T> {
    fn default() -> Self {
        Self::grid(100).expect("valid default grid")
    }
}

/// One value per score kind, in [`ScoreKind::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow<T> {
    pub accuracy: ScoreValue<T>,
    pub f1: ScoreValue<T>,
    pub tss: ScoreValue<T>,
    pub hss: ScoreValue<T>,
    pub neg_error_sum: ScoreValue<T>,
}

impl<T: Scalar> ScoreRow<T> {
    pub fn from_entries(m: &ConfusionEntries<T>) -> Self {
        Self {
            accuracy: apply_score(ScoreKind::Accuracy, m),
            f1: apply_score(ScoreKind::F1, m),
            tss: apply_score(ScoreKind::Tss, m),
            hss: apply_score(ScoreKind::Hss, m),
            neg_error_sum: apply_score(ScoreKind::NegErrorSum, m),
        }
    }

    pub fn get(&self, kind: ScoreKind) -> ScoreValue<T> {
        match kind {
            ScoreKind::Accuracy => self.accuracy,
            ScoreKind::F1 => self.f1,
            ScoreKind::Tss => self.tss,
            ScoreKind::Hss => self.hss,
            ScoreKind::NegErrorSum => self.neg_error_sum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow<T> {
    pub tau: T,
    pub classical: ConfusionCounts,
    pub weighted: ConfusionEntries<T>,
    pub classical_scores: ScoreRow<T>,
    pub weighted_scores: ScoreRow<T>,
}

/// Best threshold of one score; ties go to the smallest threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestThreshold<T> {
    pub score: ScoreKind,
    pub classical_tau: T,
    pub classical_value: T,
    pub weighted_tau: T,
    pub weighted_value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport<T> {
    pub rows: Vec<ThresholdRow<T>>,
    pub best: Vec<BestThreshold<T>>,
}

impl<T: Scalar> SweepReport<T> {
    /// Row whose threshold equals `tau` exactly.
    pub fn row(&self, tau: T) -> Option<&ThresholdRow<T>> {
        self.rows.iter().find(|r| r.tau == tau)
    }

    pub fn best(&self, kind: ScoreKind) -> Option<&BestThreshold<T>> {
        self.best.iter().find(|b| b.score == kind)
    }

    /// Flat CSV text, one line per threshold.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,tn,fp,fn,tp,w_tn,w_fp,w_fn,w_tp");
        for k in ScoreKind::ALL {
            out.push_str(&format!(",{k},w_{k}"));
        }
        out.push('\n');
        for r in &self.rows {
            let c = &r.classical;
            let w = &r.weighted;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}",
                r.tau, c.tn, c.fp, c.fn_, c.tp, w.tn, w.wfp, w.wfn, w.tp
            ));
            for k in ScoreKind::ALL {
                out.push_str(&format!(
                    ",{},{}",
                    r.classical_scores.get(k).value,
                    r.weighted_scores.get(k).value
                ));
            }
            out.push('\n');
        }
        out
    }
}

/// Classical and weighted hard confusion matrices and scores over a sweep.
pub fn sweep_report<T: Scalar>(
    series: &LabeledSeries<T>,
    sweep: &ThresholdSweep<T>,
    weights: &WeightSpec<T>,
) -> Result<SweepReport<T>> {
    weights.check_series(series)?;
    let rows = sweep
        .thresholds
        .par_iter()
        .map(|&tau| {
            let classical = hard_confusion(series, tau)?;
            let weighted = weighted_hard_confusion(series, tau, weights)?.entries();
            Ok(ThresholdRow {
                tau,
                classical_scores: ScoreRow::from_entries(&classical.entries()),
                weighted_scores: ScoreRow::from_entries(&weighted),
                classical,
                weighted,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = ScoreKind::ALL
        .iter()
        .map(|&k| {
            let pick = |f: &dyn Fn(&ThresholdRow<T>) -> T| {
                rows.iter()
                    .fold(None::<(T, T)>, |best, r| {
                        let v = f(r);
                        match best {
                            Some((_, bv)) if bv >= v => best,
                            _ => Some((r.tau, v)),
                        }
                    })
                    .expect("non-empty sweep")
            };
            let (classical_tau, classical_value) = pick(&|r| r.classical_scores.get(k).value);
            let (weighted_tau, weighted_value) = pick(&|r| r.weighted_scores.get(k).value);
            BestThreshold {
                score: k,
                classical_tau,
                classical_value,
                weighted_tau,
                weighted_value,
            }
        })
        .collect();
    Ok(SweepReport { rows, best })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_expected_points() {
        let g = ThresholdSweep::<f64>::grid(100).unwrap();
        assert_eq!(g.thresholds().len(), 99);
        assert_eq!(g.thresholds()[0], 0.01);
        assert_eq!(g.thresholds()[49], 0.5);
        assert!(ThresholdSweep::new(vec![0.0_f64]).is_err());
    }

    #[test]
    fn perfect_predictions_are_maximal_at_interior_thresholds() {
        let s = LabeledSeries::from_binary(vec![0.001, 0.999, 0.001, 0.999, 0.001], &[0, 1, 0, 1, 0]).unwrap();
        let r = sweep_report(&s, &ThresholdSweep::default(), &WeightSpec::unit()).unwrap();
        for row in &r.rows {
            assert_eq!(row.classical_scores.tss.value, 1.0);
            assert_eq!(row.classical_scores.accuracy.value, 1.0);
            assert_eq!(row.classical_scores.f1.value, 1.0);
            assert_eq!(row.classical_scores.hss.value, 1.0);
        }
    }

    #[test]
    fn constant_predictions_have_no_skill() {
        let s = LabeledSeries::from_binary(vec![0.5 + 1e-9; 4], &[0, 1, 0, 1]).unwrap();
        let r = sweep_report(&s, &ThresholdSweep::default(), &WeightSpec::unit()).unwrap();
        for row in &r.rows {
            assert_eq!(row.classical_scores.tss.value, 0.0);
            assert_eq!(row.classical_scores.hss.value, 0.0);
        }
        let high = r.row(0.7).unwrap();
        assert_eq!(high.classical.tp + high.classical.fp, 0);
        assert_eq!(high.classical_scores.f1.value, 0.0);
    }

    #[test]
    fn single_class_rows_are_flagged() {
        let s = LabeledSeries::from_binary(vec![0.5 + 1e-9; 4], &[0, 0, 0, 0]).unwrap();
        let r = sweep_report(&s, &ThresholdSweep::default(), &WeightSpec::unit()).unwrap();
        let row = r.row(0.7).unwrap();
        assert!(row.classical_scores.tss.degenerate);
        assert!(row.classical_scores.f1.degenerate);
        assert_eq!(row.classical_scores.tss.value, 0.0);
    }

    #[test]
    fn row_matches_hard_confusion() {
        let s = LabeledSeries::from_binary(vec![0.2, 0.7, 0.55, 0.4, 0.9, 0.1], &[0, 1, 0, 1, 1, 0]).unwrap();
        let r = sweep_report(&s, &ThresholdSweep::default(), &WeightSpec::unit()).unwrap();
        assert_eq!(r.row(0.5).unwrap().classical, hard_confusion(&s, 0.5).unwrap());
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 100);
        assert!(csv.starts_with("tau,tn,fp,fn,tp"));
    }
}
