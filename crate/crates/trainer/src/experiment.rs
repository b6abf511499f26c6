//! Paired training runs (baseline loss vs candidate loss on the same data
//! and initialization) and the model-level gradient check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use wsol_core::verify::{gradient_error, random_distribution, random_weights, CheckGroup, CheckResult};
use wsol_core::{CombinedLossSpec, LossSpec, ScoreKind, WeightSpec};

use crate::data::{generate_temporal_dataset, SyntheticSeriesConfig, TemporalDataset};
use crate::error::Result;
use crate::model::{Activation, Mlp};
use crate::train::{default_eval_weights, loss_and_param_gradient, scores_at, train, Batching, Optimizer, Scores, TrainConfig};

/// Offset between a run's training seed and its held-out seed.
pub const TEST_SEED_OFFSET: u64 = 1_000_003;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[serde(bound(deserialize = ""))]
pub struct ExperimentConfig {
    /// Dataset template; its seed is replaced per run.
    pub synth: SyntheticSeriesConfig,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub batching: Batching,
    pub seeds: Vec<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            synth: SyntheticSeriesConfig::default(),
            hidden: vec![8],
            activation: Activation::Tanh,
            epochs: 300,
            learning_rate: 0.01,
            optimizer: Optimizer::default(),
            batching: Batching::Full,
            seeds: vec![1, 2, 3, 4, 5],
        }
    }
}

/// Held-out scores of both models for one seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub seed: u64,
    pub baseline_classical: Scores<f64>,
    pub baseline_weighted: Scores<f64>,
    pub candidate_classical: Scores<f64>,
    pub candidate_weighted: Scores<f64>,
    /// Candidate minus baseline weighted TSS.
    pub improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub median_baseline_weighted_tss: f64,
    pub median_candidate_weighted_tss: f64,
    pub median_improvement: f64,
}

impl Comparison {
    pub fn candidate_wins(&self) -> bool {
        self.median_candidate_weighted_tss > self.median_baseline_weighted_tss
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "seed,baseline_tss,candidate_tss,baseline_w_tss,candidate_w_tss,improvement,improved\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.seed,
                r.baseline_classical.tss,
                r.candidate_classical.tss,
                r.baseline_weighted.tss,
                r.candidate_weighted.tss,
                r.improvement,
                r.improvement > 0.0
            ));
        }
        out
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn held_out(
    model: &Mlp<f64>,
    test: &TemporalDataset<f64>,
    cfg: &TrainConfig<f64>,
) -> Result<(Scores<f64>, Scores<f64>)> {
    let series = test.series(model.predict(&test.features)?)?;
    scores_at(&series, cfg.report_threshold(), &cfg.eval_weights)
}

/// Trains both losses from the same initialization on each seed and scores
/// them on a held-out series at each loss's report threshold.
pub fn compare_losses(
    exp: &ExperimentConfig,
    baseline: &CombinedLossSpec<f64>,
    candidate: &CombinedLossSpec<f64>,
    eval_weights: &WeightSpec<f64>,
) -> Result<Comparison> {
    let mut rows = Vec::with_capacity(exp.seeds.len());
    for &seed in &exp.seeds {
        let train_data = generate_temporal_dataset(&SyntheticSeriesConfig { seed, ..exp.synth })?;
        let test_data = generate_temporal_dataset(&SyntheticSeriesConfig {
            seed: seed.wrapping_add(TEST_SEED_OFFSET),
            ..exp.synth
        })?;
        let mut sizes = vec![train_data.feature_dim()];
        sizes.extend_from_slice(&exp.hidden);
        sizes.push(1);
        let init = Mlp::new(&sizes, exp.activation, seed)?;
        let run = |loss: &CombinedLossSpec<f64>| -> Result<(Scores<f64>, Scores<f64>)> {
            let cfg = TrainConfig {
                epochs: exp.epochs,
                learning_rate: exp.learning_rate,
                batching: exp.batching,
                optimizer: exp.optimizer,
                loss: loss.clone(),
                eval_weights: eval_weights.clone(),
            };
            let (model, _) = train(&init, &train_data, &cfg)?;
            held_out(&model, &test_data, &cfg)
        };
        let (bc, bw) = run(baseline)?;
        let (cc, cw) = run(candidate)?;
        rows.push(ComparisonRow {
            seed,
            baseline_classical: bc,
            baseline_weighted: bw,
            candidate_classical: cc,
            candidate_weighted: cw,
            improvement: cw.tss - bw.tss,
        });
    }
    Ok(Comparison {
        median_baseline_weighted_tss: median(rows.iter().map(|r| r.baseline_weighted.tss).collect()),
        median_candidate_weighted_tss: median(rows.iter().map(|r| r.candidate_weighted.tss).collect()),
        median_improvement: median(rows.iter().map(|r| r.improvement).collect()),
        rows,
    })
}

/// Cross entropy and TSS with `ValueMax(0.6, 0.3, 0.1)`, both under the
/// standard uniform prior.
pub fn default_loss_pair() -> (CombinedLossSpec<f64>, CombinedLossSpec<f64>) {
    let ce = LossSpec::cross_entropy(1.0, 1.0).expect("valid weights");
    let wsol = LossSpec::new(ScoreKind::Tss, default_eval_weights(), Default::default());
    (CombinedLossSpec::single(ce), CombinedLossSpec::single(wsol))
}

/// Backprop through `loss ∘ network` against central differences over
/// the parameters of a 2-4-1 network.
pub fn check_model_gradients(cases: usize, seed: u64, rtol: f64) -> CheckResult {
    const STEP: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut result = CheckResult {
        group: CheckGroup::Gradient,
        name: "2-4-1 network composition vs differences".into(),
        passed: true,
        cases: 0,
        failures: 0,
        worst: 0.0,
        detail: None,
    };
    let mut attempts = 0;
    while result.cases < cases && attempts < 20 * cases.max(1) {
        attempts += 1;
        let case = result.cases;
        let n = rng.gen_range(5..=30);
        let features: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..2).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        labels[0] = true;
        labels[1] = false;
        let data = TemporalDataset::new(features, labels).expect("valid data");
        let model = Mlp::new(&[2, 4, 1], Activation::Tanh, rng.gen()).expect("valid sizes");
        let dist = random_distribution(&mut rng, case);
        let weights = random_weights(&mut rng, case / 3 + case, &dist);
        let spec = CombinedLossSpec::single(LossSpec::new(ScoreKind::ALL[case % 5], weights, dist));
        let preds = model.predict(&data.features).expect("valid input");
        // skip draws where two predictions nearly tie: the loss has a kink there
        let near_tie = (0..n).any(|i| (i + 1..n).any(|k| (preds[i] - preds[k]).abs() < 1e-4));
        let (a, b) = dist.support();
        let outside = preds.iter().any(|&p| p <= a + 1e-4 || p >= b - 1e-4);
        if near_tie || outside {
            continue;
        }
        let (value, analytic) = match loss_and_param_gradient(&model, &data, &spec) {
            Ok(r) => r,
            Err(_) => continue,
        };
        let base = model.params();
        let eval = |p: &[f64]| -> f64 {
            let mut m = model.clone();
            m.set_params(p).expect("same shape");
            loss_and_param_gradient(&m, &data, &spec).map(|r| r.0.value).unwrap_or(f64::NAN)
        };
        let mut worst = 0.0_f64;
        for k in 0..base.len() {
            let mut up = base.clone();
            up[k] += STEP;
            let mut dn = base.clone();
            dn[k] -= STEP;
            let fd = (eval(&up) - eval(&dn)) / (2.0 * STEP);
            let e = gradient_error(analytic[k], fd, value.value);
            worst = if e.is_nan() { f64::INFINITY } else { worst.max(e) };
        }
        result.cases += 1;
        result.worst = result.worst.max(worst);
        if worst > rtol {
            result.failures += 1;
            result.passed = false;
            if result.detail.is_none() {
                result.detail = Some(format!(
                    "case {case}: loss={} rel err={worst:.3e}",
                    serde_json::to_string(&spec).unwrap_or_default()
                ));
            }
        }
    }
    result.passed &= result.cases == cases;
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn model_gradients_pass_on_a_few_cases() {
        let r = check_model_gradients(10, 3, 1e-4);
        assert!(r.passed, "{r}");
    }

    #[test]
    fn tiny_comparison_runs() {
        let exp = ExperimentConfig {
            synth: SyntheticSeriesConfig { n: 50, ..Default::default() },
            epochs: 3,
            seeds: vec![1, 2],
            ..Default::default()
        };
        let (ce, wsol) = default_loss_pair();
        let c = compare_losses(&exp, &ce, &wsol, &default_eval_weights()).unwrap();
        assert_eq!(c.rows.len(), 2);
        assert_eq!(c.to_csv().lines().count(), 3);
    }
}
