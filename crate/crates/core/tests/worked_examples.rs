use wsol_core::oracle::{exact_expected_confusion, mc_expected_confusion};
use wsol_core::{
    expected_confusion, expected_wfn, loss_value, power_intervals, LabeledSeriesF32, LabeledSeriesF64, LossSpec,
    ScoreKind, ThresholdDistribution, ThresholdDistributionF32, WeightSpec, WeightSpecF32,
};

#[test]
fn additive_window_example() {
    // ŷ = (0.2, 0.9, 0.5), only the last sample positive, ω = (0.4, 0.2).
    // FN needs τ ≥ 0.5: on [0.5, 0.9) lag 1 alarms (weight 0.6), on
    // [0.9, 1) nothing alarms (weight 1). 0.4·0.6 + 0.1·1 = 0.34.
    let s = LabeledSeriesF64::from_binary(vec![0.2, 0.9, 0.5], &[0, 0, 1]).unwrap();
    let w = WeightSpec::value_prod(vec![0.4, 0.2]).unwrap();
    let got = expected_wfn(&s, &ThresholdDistribution::standard_uniform(), &w).unwrap();
    assert!((got - 0.34).abs() < 1e-15);
}

#[test]
fn power_interval_chains() {
    let d = power_intervals(&[0.5, 0.6, 0.1, 0.8], 0.0, 1.0).unwrap();
    assert_eq!(d.chain, vec![1, 2, 4]);
    let lags: Vec<_> = d.intervals.iter().map(|iv| (iv.lag, iv.lower, iv.upper, iv.precursor)).collect();
    assert_eq!(lags, vec![(1, 0.0, 0.5, None), (2, 0.5, 0.6, Some(1)), (4, 0.6, 0.8, Some(2))]);
    assert!(d.interval(3).is_none());

    let d = power_intervals(&[0.7, 0.2, 0.9, 0.3], 0.0, 1.0).unwrap();
    assert_eq!(d.chain, vec![1, 3]);
}

#[test]
fn closed_form_matches_both_oracles() {
    let s = LabeledSeriesF64::from_binary(
        vec![0.31, 0.72, 0.15, 0.66, 0.48, 0.93, 0.27, 0.58, 0.81, 0.12],
        &[0, 1, 0, 1, 1, 0, 0, 1, 1, 0],
    )
    .unwrap();
    let dist = ThresholdDistribution::beta(2.0, 3.0).unwrap();
    let w = WeightSpec::value_max(vec![0.6, 0.3, 0.1]).unwrap();
    let closed = expected_confusion(&s, &dist, &w).unwrap();
    let exact = exact_expected_confusion(&s, &dist, &w).unwrap();
    assert!(closed.max_abs_diff(&exact) < 1e-10);
    let mc = mc_expected_confusion(&s, &dist, &w, 100_000, 11).unwrap();
    for (m, (e, se)) in closed.to_array().iter().zip(mc.mean.to_array().iter().zip(mc.std_error.to_array())) {
        assert!((m - e).abs() <= 4.0 * se + 1e-12, "{m} vs {e} ± {se}");
    }
}

#[test]
fn single_precision_path() {
    let s = LabeledSeriesF32::from_binary(vec![0.2, 0.9, 0.5, 0.7], &[0, 0, 1, 1]).unwrap();
    let w: WeightSpecF32 = WeightSpec::value_max(vec![0.5, 0.25]).unwrap();
    let spec = LossSpec::new(ScoreKind::Tss, w, ThresholdDistributionF32::standard_uniform());
    let l32 = loss_value(&s, &spec).unwrap().value;

    let s64 = LabeledSeriesF64::from_binary(vec![0.2, 0.9, 0.5, 0.7], &[0, 0, 1, 1]).unwrap();
    let spec64 = LossSpec::new(
        ScoreKind::Tss,
        WeightSpec::value_max(vec![0.5, 0.25]).unwrap(),
        ThresholdDistribution::standard_uniform(),
    );
    let l64 = loss_value(&s64, &spec64).unwrap().value;
    assert!((f64::from(l32) - l64).abs() < 1e-6);
}
