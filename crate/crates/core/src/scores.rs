//! Classification scores on (weighted or expected) confusion entries.
//!
//! All formulas accept real-valued entries so the same code scores hard
//! counts, weighted counts and threshold expectations. A zero denominator
//! yields a score of 0 with `degenerate` set instead of NaN.
//!
//! Monotonicity (non-decreasing in tn/tp, non-increasing in wfp/wfn) holds
//! on the whole non-negative orthant for accuracy, F1, TSS and the negative
//! error sum. HSS is monotone only where `tp·tn >= wfp·wfn`; with negative
//! skill it can increase with an extra false positive.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::confusion::ConfusionEntries;
use crate::error::{Result, WsolError};
use crate::num::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Accuracy,
    F1,
    Tss,
    Hss,
    /// `−(wfp + wfn)`, the linear cost score.
    NegErrorSum,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 5] = [
        ScoreKind::Accuracy,
        ScoreKind::F1,
        ScoreKind::Tss,
        ScoreKind::Hss,
        ScoreKind::NegErrorSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScoreKind::Accuracy => "accuracy",
            ScoreKind::F1 => "f1",
            ScoreKind::Tss => "tss",
            ScoreKind::Hss => "hss",
            ScoreKind::NegErrorSum => "neg_error_sum",
        }
    }

    /// Linear in the matrix entries.
    pub fn is_linear(self) -> bool {
        matches!(self, ScoreKind::NegErrorSum)
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScoreKind {
    type Err = WsolError;

    fn from_str(s: &str) -> Result<Self> {
        ScoreKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                WsolError::InvalidArgument(format!(
                    "unknown score '{s}' (expected accuracy|f1|tss|hss|neg_error_sum)"
                ))
            })
    }
}

/// Score value plus the zero-denominator flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreValue<T> {
    pub value: T,
    pub degenerate: bool,
}

impl<T: Scalar> ScoreValue<T> {
    fn ok(value: T) -> Self {
        Self {
            value,
            degenerate: false,
        }
    }

    fn degenerate() -> Self {
        Self {
            value: T::zero(),
            degenerate: true,
        }
    }
}

/// `s(tn, wfp, wfn, tp)`.
pub fn apply_score<T: Scalar>(kind: ScoreKind, m: &ConfusionEntries<T>) -> ScoreValue<T> {
    let ConfusionEntries { tn, wfp, wfn, tp } = *m;
    let zero = T::zero();
    let two = T::lit(2.0);
    match kind {
        ScoreKind::Accuracy => {
            let d = tp + tn + wfp + wfn;
            if d == zero {
                ScoreValue::degenerate()
            } else {
                ScoreValue::ok((tp + tn) / d)
            }
        }
        ScoreKind::F1 => {
            let d = two * tp + wfp + wfn;
            if d == zero {
                ScoreValue::degenerate()
            } else {
                ScoreValue::ok(two * tp / d)
            }
        }
        ScoreKind::Tss => {
            let pos = tp + wfn;
            let neg = tn + wfp;
            if pos == zero || neg == zero {
                ScoreValue::degenerate()
            } else {
                ScoreValue::ok(tp / pos + tn / neg - T::one())
            }
        }
        ScoreKind::Hss => {
            let d = (tp + wfn) * (wfn + tn) + (tp + wfp) * (wfp + tn);
            if d == zero {
                ScoreValue::degenerate()
            } else {
                ScoreValue::ok(two * (tp * tn - wfp * wfn) / d)
            }
        }
        ScoreKind::NegErrorSum => ScoreValue::ok(-(wfp + wfn)),
    }
}

/// `(∂s/∂tn, ∂s/∂wfp, ∂s/∂wfn, ∂s/∂tp)` in closed form.
pub fn score_partials<T: Scalar>(kind: ScoreKind, m: &ConfusionEntries<T>) -> Result<[T; 4]> {
    let ConfusionEntries { tn, wfp, wfn, tp } = *m;
    let zero = T::zero();
    let two = T::lit(2.0);
    match kind {
        ScoreKind::Accuracy => {
            let d = tp + tn + wfp + wfn;
            if d == zero {
                return Err(WsolError::DegenerateDenominator("tp + tn + wfp + wfn"));
            }
            let d2 = d * d;
            let right = (wfp + wfn) / d2;
            let wrong = -(tp + tn) / d2;
            Ok([right, wrong, wrong, right])
        }
        ScoreKind::F1 => {
            let d = two * tp + wfp + wfn;
            if d == zero {
                return Err(WsolError::DegenerateDenominator("2tp + wfp + wfn"));
            }
            let d2 = d * d;
            let err = -two * tp / d2;
            Ok([zero, err, err, two * (wfp + wfn) / d2])
        }
        ScoreKind::Tss => {
            let pos = tp + wfn;
            let neg = tn + wfp;
            if pos == zero {
                return Err(WsolError::DegenerateDenominator("tp + wfn"));
            }
            if neg == zero {
                return Err(WsolError::DegenerateDenominator("tn + wfp"));
            }
            let pos2 = pos * pos;
            let neg2 = neg * neg;
            Ok([wfp / neg2, -tn / neg2, -tp / pos2, wfn / pos2])
        }
        ScoreKind::Hss => {
            let d = (tp + wfn) * (wfn + tn) + (tp + wfp) * (wfp + tn);
            if d == zero {
                return Err(WsolError::DegenerateDenominator(
                    "(tp + wfn)(wfn + tn) + (tp + wfp)(wfp + tn)",
                ));
            }
            let num = two * (tp * tn - wfp * wfn);
            let d_num = [two * tp, -two * wfn, -two * wfp, two * tn];
            let d_den = [
                (tp + wfn) + (tp + wfp),
                (tp + wfp) + (wfp + tn),
                (wfn + tn) + (tp + wfn),
                (wfn + tn) + (wfp + tn),
            ];
            let d2 = d * d;
            let mut out = [zero; 4];
            for k in 0..4 {
                out[k] = (d_num[k] * d - num * d_den[k]) / d2;
            }
            Ok(out)
        }
        ScoreKind::NegErrorSum => Ok([zero, -T::one(), -T::one(), zero]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(tn: f64, wfp: f64, wfn: f64, tp: f64) -> ConfusionEntries<f64> {
        ConfusionEntries::new(tn, wfp, wfn, tp)
    }

    fn central_diff(kind: ScoreKind, x: &ConfusionEntries<f64>, h: f64) -> [f64; 4] {
        let base = x.to_array();
        let mut out = [0.0; 4];
        for k in 0..4 {
            let mut up = base;
            let mut dn = base;
            up[k] += h;
            dn[k] -= h;
            out[k] = (apply_score(kind, &ConfusionEntries::from_array(up)).value
                - apply_score(kind, &ConfusionEntries::from_array(dn)).value)
                / (2.0 * h);
        }
        out
    }

    #[test]
    fn figure_counts() {
        let cm = m(15.0, 4.0, 2.0, 5.0);
        let acc = apply_score(ScoreKind::Accuracy, &cm).value;
        assert!((acc - 20.0 / 26.0).abs() < 1e-15);
        let tss = apply_score(ScoreKind::Tss, &cm).value;
        assert!((tss - (5.0 / 7.0 + 15.0 / 19.0 - 1.0)).abs() < 1e-15);
        assert!((tss - 0.503_759_398_496_240_6).abs() < 1e-12);
        assert_eq!(apply_score(ScoreKind::NegErrorSum, &cm).value, -6.0);
        assert!((apply_score(ScoreKind::F1, &cm).value - 10.0 / 16.0).abs() < 1e-15);
        // 2(75 − 8) / (7·17 + 9·19)
        let hss = 2.0 * (75.0 - 8.0) / (7.0 * 17.0 + 9.0 * 19.0);
        assert!((apply_score(ScoreKind::Hss, &cm).value - hss).abs() < 1e-15);
    }

    #[test]
    fn perfect_classifier() {
        let cm = m(10.0, 0.0, 0.0, 10.0);
        for kind in [ScoreKind::Accuracy, ScoreKind::F1, ScoreKind::Tss, ScoreKind::Hss] {
            assert_eq!(apply_score(kind, &cm).value, 1.0, "{kind}");
        }
        assert_eq!(apply_score(ScoreKind::NegErrorSum, &cm).value, 0.0);
    }

    #[test]
    fn degenerate_denominators() {
        let no_pos = m(10.0, 2.0, 0.0, 0.0);
        let v = apply_score(ScoreKind::Tss, &no_pos);
        assert!(v.degenerate);
        assert_eq!(v.value, 0.0);
        assert!(matches!(
            score_partials(ScoreKind::Tss, &no_pos),
            Err(WsolError::DegenerateDenominator("tp + wfn"))
        ));
        let empty = ConfusionEntries::<f64>::zero();
        for kind in ScoreKind::ALL {
            let v = apply_score(kind, &empty);
            assert_eq!(v.value, 0.0);
            assert_eq!(v.degenerate, kind != ScoreKind::NegErrorSum);
        }
    }

    #[test]
    fn partial_examples() {
        let cm = m(15.0, 4.0, 2.0, 5.0);
        assert_eq!(
            score_partials(ScoreKind::NegErrorSum, &cm).unwrap(),
            [0.0, -1.0, -1.0, 0.0]
        );
        let tss = score_partials(ScoreKind::Tss, &m(10.0, 0.0, 0.0, 10.0)).unwrap();
        assert!((tss[2] + 0.1).abs() < 1e-15);
        let f1 = score_partials(ScoreKind::F1, &cm).unwrap();
        let fd = central_diff(ScoreKind::F1, &cm, 1e-5);
        for k in 0..4 {
            assert!((f1[k] - fd[k]).abs() < 1e-7, "k={k}: {} vs {}", f1[k], fd[k]);
        }
    }

    #[test]
    fn partials_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let cm = m(
                rng.gen_range(0.5..30.0),
                rng.gen_range(0.5..30.0),
                rng.gen_range(0.5..30.0),
                rng.gen_range(0.5..30.0),
            );
            for kind in ScoreKind::ALL {
                let a = score_partials(kind, &cm).unwrap();
                let fd = central_diff(kind, &cm, 1e-5);
                let scale = a.iter().fold(0.0_f64, |s, v| s.max(v.abs())).max(1e-12);
                for k in 0..4 {
                    assert!(
                        (a[k] - fd[k]).abs() <= 1e-6 * scale,
                        "{kind} k={k}: {} vs {}",
                        a[k],
                        fd[k]
                    );
                }
            }
        }
    }

    #[test]
    fn monotonicity_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let cm = m(
                rng.gen_range(0.0..40.0),
                rng.gen_range(0.0..40.0),
                rng.gen_range(0.0..40.0),
                rng.gen_range(0.0..40.0),
            );
            for kind in ScoreKind::ALL {
                let base = apply_score(kind, &cm);
                if base.degenerate || (kind == ScoreKind::Hss && cm.tp * cm.tn < cm.wfp * cm.wfn) {
                    continue;
                }
                let tol = 1e-12;
                let bumped = |k: usize, d: f64| {
                    let mut a = cm.to_array();
                    a[k] += d;
                    apply_score(kind, &ConfusionEntries::from_array(a))
                };
                for k in [0, 3] {
                    let v = bumped(k, 1.0);
                    assert!(v.degenerate || v.value >= base.value - tol, "{kind} {cm:?}");
                }
                for k in [1, 2] {
                    let v = bumped(k, 1.0);
                    assert!(v.degenerate || v.value <= base.value + tol, "{kind} {cm:?}");
                }
            }
        }
    }

    #[test]
    fn hss_not_monotone_with_negative_skill() {
        // tn ≈ 0, large fp: another false positive raises HSS
        let cm = m(0.006, 10.2, 0.2, 0.03);
        let base = apply_score(ScoreKind::Hss, &cm).value;
        let more_fp = apply_score(ScoreKind::Hss, &m(0.006, 11.2, 0.2, 0.03)).value;
        assert!(more_fp > base);
    }

    #[test]
    fn neg_error_sum_is_linear() {
        let a = m(3.0, 1.5, 2.25, 4.0);
        let b = m(1.0, 0.5, 4.0, 2.0);
        let lam = 0.25;
        let mix = a.scale(lam).add(&b.scale(1.0 - lam));
        let lhs = apply_score(ScoreKind::NegErrorSum, &mix).value;
        let rhs = lam * apply_score(ScoreKind::NegErrorSum, &a).value
            + (1.0 - lam) * apply_score(ScoreKind::NegErrorSum, &b).value;
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn names_parse() {
        for kind in ScoreKind::ALL {
            assert_eq!(kind.name().parse::<ScoreKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.name()));
        }
        assert!("auc".parse::<ScoreKind>().is_err());
    }
}
