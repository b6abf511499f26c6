//! Self-check suite: closed forms against the exact and Monte Carlo
//! oracles, gradient checks, the cross-entropy identity, cost scaling,
//! weighted-vs-classical ordering, multilabel consistency and the
//! two-series demonstration.
//!
//! Every group is deterministic given [`VerifyConfig`].

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::confusion::{hard_confusion, weighted_hard_confusion, ConfusionCounts};
use crate::demo;
use crate::error::{Result, WsolError};
use crate::expected_cm::{expected_confusion, expected_wfn, power_intervals};
use crate::loss::{exact_score_gap, expected_score_gap, loss_gradient, loss_value, LossSpec};
use crate::multilabel::{multilabel_global_score, multilabel_wsol, Aggregator, ClassSpec, MultilabelSeries, MultilabelSpec};
use crate::oracle::{exact_expected_confusion, finite_diff_gradient, mc_expected_confusion};
use crate::scores::{apply_score, ScoreKind};
use crate::series::LabeledSeries;
use crate::threshold_dist::ThresholdDistribution;
use crate::weight_spec::WeightSpec;

/// Tolerance of closed forms against the exact oracle.
pub const EXACT_TOL: f64 = 1e-10;
/// Width of Monte Carlo acceptance bands, in standard errors.
pub const MC_SIGMAS: f64 = 4.0;
/// Relative tolerance of analytic gradients against central differences.
pub const GRAD_RTOL: f64 = 1e-5;
/// Relative tolerance of the cross-entropy identity.
pub const WCE_RTOL: f64 = 1e-12;
/// Slack for floating-point rounding in score comparisons.
pub const ORDER_SLACK: f64 = 1e-12;
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckGroup {
    /// Linear-score equality `s(E[wCM]) = E[s(wCM)]`.
    Thm1,
    /// Additive value weights.
    Thm2,
    /// Max value weights and power intervals.
    Thm3,
    /// Exact vs Monte Carlo vs closed form for every weight variant.
    Oracle,
    Wce,
    Cost,
    Gradient,
    Remark,
    Multilabel,
    Figure1,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 10] = [
        CheckGroup::Thm1,
        CheckGroup::Thm2,
        CheckGroup::Thm3,
        CheckGroup::Oracle,
        CheckGroup::Wce,
        CheckGroup::Cost,
        CheckGroup::Gradient,
        CheckGroup::Remark,
        CheckGroup::Multilabel,
        CheckGroup::Figure1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::Thm1 => "thm1",
            CheckGroup::Thm2 => "thm2",
            CheckGroup::Thm3 => "thm3",
            CheckGroup::Oracle => "oracle",
            CheckGroup::Wce => "wce",
            CheckGroup::Cost => "cost",
            CheckGroup::Gradient => "gradient",
            CheckGroup::Remark => "remark",
            CheckGroup::Multilabel => "multilabel",
            CheckGroup::Figure1 => "figure1",
        }
    }
}

impl fmt::Display for CheckGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckGroup {
    type Err = WsolError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|g| g.name()).collect();
                WsolError::InvalidArgument(format!(
                    "unknown check group {s:?}, expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    /// Random series per group.
    pub cases: usize,
    /// Monte Carlo draws per oracle call.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            cases: 200,
            samples: 100_000,
            seed: 20_240_901,
        }
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub group: CheckGroup,
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    /// Largest error observed, in the check's own unit.
    pub worst: f64,
    /// First failing configuration.
    pub detail: Option<String>,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<10} {:<34} cases={:<5} failures={:<3} worst={:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.group.name(),
            self.name,
            self.cases,
            self.failures,
            self.worst
        )?;
        if let Some(d) = &self.detail {
            write!(f, "\n     first failure: {d}")?;
        }
        Ok(())
    }
}

/// Accumulates case outcomes for one named check.
struct Tally {
    group: CheckGroup,
    name: String,
    cases: usize,
    failures: usize,
    worst: f64,
    detail: Option<String>,
}

impl Tally {
    fn new(group: CheckGroup, name: &str) -> Self {
        Self {
            group,
            name: name.to_string(),
            cases: 0,
            failures: 0,
            worst: 0.0,
            detail: None,
        }
    }

    /// Records one case; `err` is the error measure, `ok` the verdict.
    fn record(&mut self, ok: bool, err: f64, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if err.is_nan() || err > self.worst {
            self.worst = err;
        }
        if !ok {
            self.failures += 1;
            if self.detail.is_none() {
                self.detail = Some(describe());
            }
        }
    }

    fn fail(&mut self, describe: String) {
        self.record(false, f64::NAN, || describe);
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            group: self.group,
            passed: self.failures == 0 && self.cases > 0,
            name: self.name,
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
            detail: self.detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub results: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

/// Runs the selected groups (all when `only` is empty).
pub fn run(cfg: &VerifyConfig, only: &[CheckGroup]) -> Result<VerifyReport> {
    if cfg.samples < crate::oracle::MIN_MC_SAMPLES {
        return Err(WsolError::InvalidArgument(format!(
            "at least {} Monte Carlo samples are required",
            crate::oracle::MIN_MC_SAMPLES
        )));
    }
    let groups: Vec<CheckGroup> = if only.is_empty() {
        CheckGroup::ALL.to_vec()
    } else {
        only.to_vec()
    };
    let mut results = Vec::new();
    for g in groups {
        results.extend(run_group(g, cfg));
    }
    Ok(VerifyReport {
        config: *cfg,
        results,
    })
}

pub fn run_group(group: CheckGroup, cfg: &VerifyConfig) -> Vec<CheckResult> {
    match group {
        CheckGroup::Thm1 => linear_equality(cfg),
        CheckGroup::Thm2 => value_prod(cfg),
        CheckGroup::Thm3 => value_max(cfg),
        CheckGroup::Oracle => oracle_agreement(cfg),
        CheckGroup::Wce => cross_entropy_identity(cfg),
        CheckGroup::Cost => cost_scaling(cfg),
        CheckGroup::Gradient => prediction_gradients(cfg),
        CheckGroup::Remark => weighted_ordering(cfg),
        CheckGroup::Multilabel => multilabel(cfg),
        CheckGroup::Figure1 => figure1(),
    }
}

// ---------------------------------------------------------------------------
// random configurations

fn group_rng(cfg: &VerifyConfig, group: CheckGroup) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(group as u64 + 1);
    rng
}

/// Cycles through `Uniform(0,1)`, a narrower uniform, and a random beta.
pub fn random_distribution(rng: &mut impl Rng, case: usize) -> ThresholdDistribution<f64> {
    match case % 3 {
        0 => ThresholdDistribution::standard_uniform(),
        1 => ThresholdDistribution::uniform(rng.gen_range(0.0..0.2), rng.gen_range(0.8..1.0))
            .expect("valid uniform"),
        _ => ThresholdDistribution::beta(rng.gen_range(0.5..5.0), rng.gen_range(0.5..5.0))
            .expect("valid beta"),
    }
}

/// Chronological series with at least one positive and one negative.
///
/// Predictions stay inside the open support of `dist`; with `ties` they
/// are drawn from a coarse grid so that repeated values occur.
pub fn random_series(
    rng: &mut impl Rng,
    n: usize,
    dist: &ThresholdDistribution<f64>,
    ties: bool,
) -> LabeledSeries<f64> {
    let (a, b) = dist.support();
    let (lo, hi) = (a.max(0.0) + 0.01, b.min(1.0) - 0.01);
    let n = n.max(2);
    let preds = (0..n)
        .map(|_| {
            if ties {
                let k = rng.gen_range(1..10) as f64;
                (lo + (hi - lo) * k / 10.0).clamp(lo, hi)
            } else {
                rng.gen_range(lo..hi)
            }
        })
        .collect();
    let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
    let p = rng.gen_range(0..n);
    labels[p] = true;
    labels[(p + 1 + rng.gen_range(0..n - 1)) % n] = false;
    LabeledSeries::new(preds, labels).expect("valid random series")
}

/// Non-increasing window of length `t` with `Σω < 1` (`prod`) or `max ω < 1`.
pub fn random_omega(rng: &mut impl Rng, t: usize, prod: bool) -> Vec<f64> {
    let mut w: Vec<f64> = (0..t).map(|_| rng.gen_range(0.0..1.0)).collect();
    w.sort_by(|x, y| y.partial_cmp(x).expect("finite"));
    let scale = if prod {
        rng.gen_range(0.05..0.99) / w.iter().sum::<f64>().max(1e-12)
    } else {
        rng.gen_range(0.05..0.99) / w[0].max(1e-12)
    };
    w.iter_mut().for_each(|x| *x *= scale);
    w
}

/// One of the five weight variants, valid under `dist`.
pub fn random_weights(rng: &mut impl Rng, variant: usize, dist: &ThresholdDistribution<f64>) -> WeightSpec<f64> {
    let t = rng.gen_range(1..=6);
    match variant % 5 {
        0 => WeightSpec::unit(),
        1 => WeightSpec::cost(rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0)).expect("valid cost"),
        2 if dist.is_standard_uniform() => {
            WeightSpec::cross_entropy(rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0)).expect("valid ce")
        }
        2 => WeightSpec::cost(rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0)).expect("valid cost"),
        3 => WeightSpec::value_prod(random_omega(rng, t, true)).expect("valid prod"),
        _ => WeightSpec::value_max(random_omega(rng, t, false)).expect("valid max"),
    }
}

fn describe(series: &LabeledSeries<f64>, dist: &ThresholdDistribution<f64>, spec: &WeightSpec<f64>) -> String {
    format!(
        "dist={} weights={} labels={:?} predictions={:?}",
        serde_json::to_string(dist).unwrap_or_default(),
        serde_json::to_string(spec).unwrap_or_default(),
        series.labels().iter().map(|&l| u8::from(l)).collect::<Vec<_>>(),
        series.predictions()
    )
}

/// `|x − y| ≤ k σ`, with an exact match required when σ vanishes.
fn within_sigma(x: f64, y: f64, se: f64) -> (bool, f64) {
    let d = (x - y).abs();
    if se > 0.0 {
        (d <= MC_SIGMAS * se, d / se)
    } else {
        (d <= 1e-12, if d <= 1e-12 { 0.0 } else { f64::INFINITY })
    }
}

// ---------------------------------------------------------------------------
// value weights

fn closed_vs_oracles(
    cfg: &VerifyConfig,
    group: CheckGroup,
    make_spec: impl Fn(&mut ChaCha8Rng, usize) -> Vec<f64>,
    build: impl Fn(Vec<f64>) -> WeightSpec<f64>,
) -> (CheckResult, CheckResult) {
    let mut rng = group_rng(cfg, group);
    let mut exact = Tally::new(group, "e_wfn closed form vs exact oracle");
    let mut mc = Tally::new(group, "e_wfn closed form vs Monte Carlo");
    for case in 0..cfg.cases {
        let dist = random_distribution(&mut rng, case);
        let n = rng.gen_range(2..=50);
        let series = random_series(&mut rng, n, &dist, case % 4 == 3);
        let t = rng.gen_range(1..=6);
        let spec = build(make_spec(&mut rng, t));
        let closed = match expected_wfn(&series, &dist, &spec) {
            Ok(v) => v,
            Err(e) => {
                exact.fail(format!("{e}: {}", describe(&series, &dist, &spec)));
                continue;
            }
        };
        let ex = exact_expected_confusion(&series, &dist, &spec).expect("validated inputs");
        let d = (closed - ex.wfn).abs();
        exact.record(d <= EXACT_TOL, d, || describe(&series, &dist, &spec));
        let m = mc_expected_confusion(&series, &dist, &spec, cfg.samples, cfg.seed.wrapping_add(case as u64))
            .expect("validated inputs");
        let (ok, z) = within_sigma(closed, m.mean.wfn, m.std_error.wfn);
        mc.record(ok, z, || {
            format!("closed={closed} mc={}±{}: {}", m.mean.wfn, m.std_error.wfn, describe(&series, &dist, &spec))
        });
    }
    (exact.finish(), mc.finish())
}

fn value_prod(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let (a, b) = closed_vs_oracles(
        cfg,
        CheckGroup::Thm2,
        |rng, t| random_omega(rng, t, true),
        |w| WeightSpec::value_prod(w).expect("valid prod"),
    );
    let mut hand = Tally::new(CheckGroup::Thm2, "worked example 0.34");
    let s = LabeledSeries::from_binary(vec![0.2, 0.9, 0.5], &[0, 0, 1]).expect("valid");
    let spec = WeightSpec::value_prod(vec![0.4, 0.2]).expect("valid");
    let got = expected_wfn(&s, &ThresholdDistribution::standard_uniform(), &spec).unwrap_or(f64::NAN);
    let d = (got - 0.34).abs();
    hand.record(d <= 1e-15, d, || format!("got {got}"));
    vec![a, b, hand.finish()]
}

/// Two hand-checked chain examples embedded in a series as the past of a positive.
fn chain_examples() -> CheckResult {
    let mut t = Tally::new(CheckGroup::Thm3, "power intervals and chains");
    type Iv = (usize, f64, f64, Option<usize>);
    let cases: [(&[f64], &[Iv], &[usize]); 3] = [
        (
            &[0.5, 0.6, 0.1, 0.8],
            &[(1, 0.0, 0.5, None), (2, 0.5, 0.6, Some(1)), (4, 0.6, 0.8, Some(2))],
            &[1, 2, 4],
        ),
        (&[0.7, 0.2, 0.9, 0.3], &[(1, 0.0, 0.7, None), (3, 0.7, 0.9, Some(1))], &[1, 3]),
        (&[0.35], &[(1, 0.0, 0.35, None)], &[1]),
    ];
    for (past, ivs, chain) in cases {
        let d = match power_intervals(past, 0.0, 1.0) {
            Ok(d) => d,
            Err(e) => {
                t.fail(format!("{past:?}: {e}"));
                continue;
            }
        };
        let got: Vec<Iv> = d.intervals.iter().map(|iv| (iv.lag, iv.lower, iv.upper, iv.precursor)).collect();
        let ok = got == ivs && d.chain == chain;
        t.record(ok, if ok { 0.0 } else { 1.0 }, || {
            format!("past={past:?} intervals={got:?} chain={:?}", d.chain)
        });
        // embed: the past window precedes a positive, oldest first
        for &yi in &[0.05, 0.55, 0.95] {
            let mut preds: Vec<f64> = past.iter().rev().copied().collect();
            preds.push(yi);
            let mut labels = vec![false; past.len()];
            labels.push(true);
            let s = LabeledSeries::new(preds, labels).expect("valid");
            let spec = WeightSpec::value_max(vec![0.5, 0.4, 0.25, 0.1][..past.len()].to_vec()).expect("valid");
            let dist = ThresholdDistribution::standard_uniform();
            let closed = expected_wfn(&s, &dist, &spec).unwrap_or(f64::NAN);
            let ex = exact_expected_confusion(&s, &dist, &spec).expect("valid").wfn;
            let err = (closed - ex).abs();
            t.record(err <= EXACT_TOL, err, || format!("embedded past={past:?} y_i={yi}: closed={closed} exact={ex}"));
        }
    }
    t.finish()
}

/// `ω ≡ c`: per positive `1 − F(ŷ_i) − c (F(max past) − F(min(max past, ŷ_i)))`.
fn constant_omega(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut t = Tally::new(CheckGroup::Thm3, "constant omega special case");
    for case in 0..cfg.cases {
        let dist = random_distribution(rng, case);
        let n = rng.gen_range(2..=50);
        let series = random_series(rng, n, &dist, case % 4 == 3);
        let w = rng.gen_range(1..=6);
        let c = if case % 5 == 0 { 0.999 } else { rng.gen_range(0.01..0.999) };
        let spec = WeightSpec::value_max(vec![c; w]).expect("valid");
        let closed = expected_wfn(&series, &dist, &spec).unwrap_or(f64::NAN);
        let mut formula = 0.0;
        for i in (0..series.len()).filter(|&i| series.label(i)) {
            let yi = series.prediction(i);
            let fi = dist.cdf(yi);
            let top = (1..=w.min(i)).map(|j| series.prediction(i - j)).fold(f64::NEG_INFINITY, f64::max);
            let bonus = if top.is_finite() { dist.cdf(top) - dist.cdf(top.min(yi)) } else { 0.0 };
            formula += 1.0 - fi - c * bonus;
        }
        let err = (closed - formula).abs();
        t.record(err <= EXACT_TOL, err, || format!("c={c} closed={closed} formula={formula}: {}", describe(&series, &dist, &spec)));
    }
    t.finish()
}

/// Def.-style pointwise check of the interval decomposition on sampled ξ.
fn interval_cover(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut t = Tally::new(CheckGroup::Thm3, "interval cover, 1e4 xi per window");
    for case in 0..cfg.cases.min(50) {
        let len = rng.gen_range(1..=6);
        let past: Vec<f64> = if case % 3 == 0 {
            (0..len).map(|_| rng.gen_range(1..10) as f64 / 10.0).collect()
        } else {
            (0..len).map(|_| rng.gen_range(0.01..0.99)).collect()
        };
        let dec = power_intervals(&past, 0.0, 1.0).expect("valid past");
        let top = past.iter().copied().fold(0.0, f64::max);
        let mut bad = 0usize;
        for _ in 0..10_000 {
            let xi: f64 = rng.gen_range(0.0..1.0);
            let owners: Vec<usize> = dec
                .intervals
                .iter()
                .filter(|iv| iv.lower <= xi && xi < iv.upper)
                .map(|iv| iv.lag)
                .collect();
            // lag j owns ξ iff ŷ_{i−j} > ξ and no earlier lag exceeds ξ
            let want = (1..=len).find(|&j| past[j - 1] > xi);
            let ok = if xi < top { owners.len() == 1 && Some(owners[0]) == want } else { owners.is_empty() };
            bad += usize::from(!ok);
        }
        t.record(bad == 0, bad as f64, || format!("past={past:?} bad xi={bad}"));
    }
    t.finish()
}

fn value_max(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let (a, b) = closed_vs_oracles(
        cfg,
        CheckGroup::Thm3,
        |rng, t| random_omega(rng, t, false),
        |w| WeightSpec::value_max(w).expect("valid max"),
    );
    let mut rng = group_rng(cfg, CheckGroup::Thm3);
    rng.set_stream(CheckGroup::ALL.len() as u64 + 1);
    vec![a, b, chain_examples(), constant_omega(cfg, &mut rng), interval_cover(cfg, &mut rng)]
}

// ---------------------------------------------------------------------------
// other groups

fn oracle_agreement(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut rng = group_rng(cfg, CheckGroup::Oracle);
    let mut exact = Tally::new(CheckGroup::Oracle, "closed form vs exact, all entries");
    let mut mc = Tally::new(CheckGroup::Oracle, "exact vs Monte Carlo, all entries");
    let cases = cfg.cases.min(40);
    for case in 0..cases {
        let dist = random_distribution(&mut rng, case);
        let n = rng.gen_range(2..=50);
        let series = random_series(&mut rng, n, &dist, case % 4 == 3);
        let spec = random_weights(&mut rng, case / 3, &dist);
        let closed = expected_confusion(&series, &dist, &spec).expect("valid case");
        let ex = exact_expected_confusion(&series, &dist, &spec).expect("valid case");
        let d = closed.max_abs_diff(&ex);
        exact.record(d <= EXACT_TOL, d, || describe(&series, &dist, &spec));
        let m = mc_expected_confusion(&series, &dist, &spec, cfg.samples, cfg.seed ^ case as u64).expect("valid case");
        let mut worst = 0.0_f64;
        let mut ok = true;
        for ((e, mean), se) in ex.to_array().into_iter().zip(m.mean.to_array()).zip(m.std_error.to_array()) {
            let (o, z) = within_sigma(e, mean, se);
            ok &= o;
            worst = worst.max(z);
        }
        mc.record(ok, worst, || format!("exact={ex:?} mc={:?}: {}", m.mean, describe(&series, &dist, &spec)));
    }
    vec![exact.finish(), mc.finish()]
}

fn linear_equality(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut rng = group_rng(cfg, CheckGroup::Thm1);
    let mut exact = Tally::new(CheckGroup::Thm1, "neg_error_sum: s(E[wCM]) = E[s(wCM)]");
    let mut mc = Tally::new(CheckGroup::Thm1, "neg_error_sum equality, Monte Carlo");
    let cases = cfg.cases.max(5);
    for case in 0..cases {
        // five variants, each under several priors
        let variant = case % 5;
        let dist = if variant == 2 {
            ThresholdDistribution::standard_uniform()
        } else {
            random_distribution(&mut rng, case / 5)
        };
        let n = rng.gen_range(2..=50);
        let series = random_series(&mut rng, n, &dist, case % 7 == 6);
        let weights = random_weights(&mut rng, variant, &dist);
        let spec = LossSpec::new(ScoreKind::NegErrorSum, weights, dist);
        let gap = exact_score_gap(&series, &spec).expect("valid case");
        let d = gap.gap.abs();
        exact.record(d <= EXACT_TOL, d, || describe(&series, &spec.dist, &spec.weights));
        if case < cfg.cases.min(25) {
            let g = expected_score_gap(&series, &spec, cfg.samples, cfg.seed.wrapping_mul(31) ^ case as u64)
                .expect("valid case");
            let (ok, z) = within_sigma(g.lhs, g.rhs, g.rhs_std_error);
            mc.record(ok, z, || format!("lhs={} rhs={}±{}", g.lhs, g.rhs, g.rhs_std_error));
        }
    }
    vec![exact.finish(), mc.finish()]
}

fn cross_entropy_identity(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut rng = group_rng(cfg, CheckGroup::Wce);
    let mut weighted = Tally::new(CheckGroup::Wce, "wSOL equals weighted cross entropy");
    let mut classical = Tally::new(CheckGroup::Wce, "unit omegas equal binary cross entropy");
    let dist = ThresholdDistribution::standard_uniform();
    for case in 0..cfg.cases.max(100) {
        let n = rng.gen_range(2..=50);
        let series = random_series(&mut rng, n, &dist, false);
        // (0, 5]
        let w0 = 5.0 - rng.gen_range(0.0..5.0);
        let w1 = 5.0 - rng.gen_range(0.0..5.0);
        let got = loss_value(&series, &LossSpec::cross_entropy(w0, w1).expect("valid")).expect("valid").value;
        let want: f64 = (0..series.len())
            .map(|i| {
                let p = series.prediction(i);
                if series.label(i) { -w1 * p.ln() } else { -w0 * (1.0 - p).ln() }
            })
            .sum();
        let rel = (got - want).abs() / want.abs().max(1.0);
        weighted.record(rel <= WCE_RTOL, rel, || format!("case {case} w0={w0} w1={w1} got={got} want={want}"));
        let got1 = loss_value(&series, &LossSpec::cross_entropy(1.0, 1.0).expect("valid")).expect("valid").value;
        let bce: f64 = (0..series.len())
            .map(|i| {
                let (p, y) = (series.prediction(i), series.y(i));
                -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
            })
            .sum();
        let rel1 = (got1 - bce).abs() / bce.abs().max(1.0);
        classical.record(rel1 <= WCE_RTOL, rel1, || format!("case {case} got={got1} bce={bce}"));
    }
    vec![weighted.finish(), classical.finish()]
}

fn cost_scaling(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut rng = group_rng(cfg, CheckGroup::Cost);
    let mut t = Tally::new(CheckGroup::Cost, "cost entries = constant x unit entries");
    for case in 0..cfg.cases.max(20) {
        let dist = random_distribution(&mut rng, case);
        let n = rng.gen_range(2..=50);
        let series = random_series(&mut rng, n, &dist, case % 3 == 0);
        let (c01, c10) = (rng.gen_range(0.01..10.0), rng.gen_range(0.01..10.0));
        let unit = expected_confusion(&series, &dist, &WeightSpec::unit()).expect("valid");
        let cost = expected_confusion(&series, &dist, &WeightSpec::cost(c01, c10).expect("valid")).expect("valid");
        let ok = cost.wfp == c01 * unit.wfp && cost.wfn == c10 * unit.wfn && cost.tn == unit.tn && cost.tp == unit.tp;
        let err = (cost.wfp - c01 * unit.wfp).abs().max((cost.wfn - c10 * unit.wfn).abs());
        t.record(ok, err, || format!("c01={c01} c10={c10} unit={unit:?} cost={cost:?}"));
    }
    vec![t.finish()]
}

/// Relative gradient error. Gradients smaller than `1e-4·max(1, |ℓ|)` are
/// measured against that magnitude instead, where finite-difference
/// roundoff dominates.
pub fn gradient_error(analytic: f64, numeric: f64, loss_scale: f64) -> f64 {
    let floor = 1e-4 * loss_scale.abs().max(1.0);
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

fn prediction_gradients(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut rng = group_rng(cfg, CheckGroup::Gradient);
    let mut t = Tally::new(CheckGroup::Gradient, "analytic vs central differences");
    for case in 0..cfg.cases.max(100) {
        let dist = random_distribution(&mut rng, case);
        let n = rng.gen_range(2..=30);
        let series = random_series(&mut rng, n, &dist, false);
        let score = ScoreKind::ALL[case % 5];
        let weights = random_weights(&mut rng, case / 5 + case, &dist);
        let spec = LossSpec::new(score, weights, dist);
        let analytic = match loss_gradient(&series, &spec) {
            Ok(g) => g,
            Err(e) => {
                t.fail(format!("{e}: {}", describe(&series, &spec.dist, &spec.weights)));
                continue;
            }
        };
        let fd = finite_diff_gradient(&series, &spec, FD_STEP).expect("valid step");
        let scale = loss_value(&series, &spec).expect("valid").value;
        let p = series.predictions();
        let mut worst = 0.0_f64;
        for k in 0..n {
            // skip kinks and stencils that straddle another prediction
            let near = p.iter().enumerate().any(|(j, &q)| j != k && (q - p[k]).abs() < 10.0 * FD_STEP);
            if analytic.kinks.contains(&k) || fd.clamped[k] || near {
                continue;
            }
            worst = worst.max(gradient_error(analytic.values[k], fd.values[k], scale));
        }
        t.record(worst <= GRAD_RTOL, worst, || {
            format!("score={score} {}", describe(&series, &spec.dist, &spec.weights))
        });
    }
    vec![t.finish()]
}

fn weighted_ordering(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut rng = group_rng(cfg, CheckGroup::Remark);
    let mut t = Tally::new(CheckGroup::Remark, "wfn<=fn, wfp<=fp, s_w>=s");
    let mut hss_skipped = 0usize;
    for case in 0..cfg.cases.max(500) {
        let dist = ThresholdDistribution::standard_uniform();
        let n = rng.gen_range(2..=50);
        let series = random_series(&mut rng, n, &dist, case % 4 == 0);
        let tw = rng.gen_range(1..=6);
        let weights = if case % 2 == 0 {
            WeightSpec::value_prod(random_omega(&mut rng, tw, true)).expect("valid")
        } else {
            WeightSpec::value_max(random_omega(&mut rng, tw, false)).expect("valid")
        };
        let tau = rng.gen_range(0.001..0.999);
        let c: ConfusionCounts = hard_confusion(&series, tau).expect("valid tau");
        let w = weighted_hard_confusion(&series, tau, &weights).expect("valid").entries();
        let ce = c.entries::<f64>();
        let mut ok = w.wfn <= ce.wfn && w.wfp <= ce.wfp;
        let mut worst = (w.wfn - ce.wfn).max(w.wfp - ce.wfp).max(0.0);
        for k in ScoreKind::ALL {
            // HSS is monotone only where tp·tn ≥ fp·fn
            if k == ScoreKind::Hss && (c.tp * c.tn) < (c.fp * c.fn_) {
                hss_skipped += 1;
                continue;
            }
            let sw = apply_score(k, &w).value;
            let s = apply_score(k, &ce).value;
            ok &= sw >= s - ORDER_SLACK;
            worst = worst.max(s - sw);
        }
        t.record(ok, worst, || format!("tau={tau} {}", describe(&series, &dist, &weights)));
    }
    let mut r = t.finish();
    r.name = format!("{} (hss skipped on {hss_skipped} negative-skill draws)", r.name);
    vec![r]
}

fn multilabel(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut rng = group_rng(cfg, CheckGroup::Multilabel);
    let mut blocks = Tally::new(CheckGroup::Multilabel, "mean gradient = scaled class gradients");
    let mut priors = Tally::new(CheckGroup::Multilabel, "mixed priors vs per-class exact oracle");
    for case in 0..cfg.cases.max(15) {
        let d = [2, 3, 5][case % 3];
        let n = rng.gen_range(2..=40);
        let score = ScoreKind::ALL[case % 5];
        let mut classes = Vec::with_capacity(d);
        let mut columns = Vec::with_capacity(d);
        for j in 0..d {
            let dist = if j % 2 == 0 {
                ThresholdDistribution::standard_uniform()
            } else {
                ThresholdDistribution::beta(2.0, 2.0).expect("valid")
            };
            let weights = random_weights(&mut rng, case + j, &dist);
            columns.push(random_series(&mut rng, n, &dist, false));
            classes.push(ClassSpec { distribution: dist, weights });
        }
        let data = MultilabelSeries::from_columns(columns).expect("valid columns");
        let spec = MultilabelSpec { classes, score, aggregator: Aggregator::Mean };
        let out = match multilabel_wsol(&data, &spec) {
            Ok(o) => o,
            Err(e) => {
                blocks.fail(format!("d={d} score={score}: {e}"));
                continue;
            }
        };
        let mut worst = 0.0_f64;
        let mut hand = 0.0;
        for j in 0..d {
            let ls = LossSpec::new(score, spec.classes[j].weights.clone(), spec.classes[j].distribution);
            let g = loss_gradient(data.column(j), &ls).expect("valid class");
            for i in 0..n {
                worst = worst.max((out.gradient[j][i] - g.values[i] / d as f64).abs());
            }
            let ex = exact_expected_confusion(data.column(j), &ls.dist, &ls.weights).expect("valid class");
            hand += apply_score(score, &ex).value / d as f64;
        }
        blocks.record(worst <= 1e-12, worst, || format!("d={d} score={score} n={n}"));
        let global = multilabel_global_score(&data, &spec).expect("valid").value;
        let err = (global - hand).abs();
        priors.record(err <= EXACT_TOL, err, || format!("d={d} score={score} global={global} oracle={hand}"));
    }
    vec![blocks.finish(), priors.finish()]
}

fn figure1() -> Vec<CheckResult> {
    let mut t = Tally::new(CheckGroup::Figure1, "same matrix, adjacent errors score higher");
    let c = match demo::compare::<f64>(&demo::demo_weights()) {
        Ok(c) => c,
        Err(e) => {
            t.fail(e.to_string());
            return vec![t.finish()];
        }
    };
    let want = ConfusionCounts { tn: 15, fp: 4, fn_: 2, tp: 5 };
    let same = c.a.classical == want && c.b.classical == want && c.a.classical_scores == c.b.classical_scores;
    t.record(same, 0.0, || format!("classical A={:?} B={:?}", c.a.classical, c.b.classical));
    for k in [ScoreKind::Tss, ScoreKind::Hss, ScoreKind::F1] {
        let (a, b) = (c.a.weighted_scores.get(k).value, c.b.weighted_scores.get(k).value);
        t.record(a > b, (b - a).max(0.0), || format!("{k}: weighted A={a} B={b}"));
    }
    vec![t.finish()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyConfig {
        VerifyConfig { cases: 6, samples: 2_000, seed: 5 }
    }

    #[test]
    fn group_names_round_trip() {
        for g in CheckGroup::ALL {
            assert_eq!(g.name().parse::<CheckGroup>().unwrap(), g);
        }
        assert!("thm9".parse::<CheckGroup>().is_err());
    }

    #[test]
    fn deterministic_groups_pass() {
        for g in [CheckGroup::Cost, CheckGroup::Figure1, CheckGroup::Wce] {
            for r in run_group(g, &small()) {
                assert!(r.passed, "{r}");
            }
        }
    }

    #[test]
    fn filter_runs_only_requested_group() {
        let r = run(&small(), &[CheckGroup::Figure1]).unwrap();
        assert!(r.results.iter().all(|c| c.group == CheckGroup::Figure1));
        assert!(r.passed());
    }

    #[test]
    fn too_few_samples_rejected() {
        let cfg = VerifyConfig { samples: 10, ..small() };
        assert!(run(&cfg, &[]).is_err());
    }

    #[test]
    fn gradient_error_floor() {
        assert!((gradient_error(1.0, 1.1, 1.0) - 0.1 / 1.1).abs() < 1e-12);
        assert!((gradient_error(1e-9, 2e-9, 1.0) - 1e-5).abs() < 1e-15);
        assert!((gradient_error(1e-9, 2e-9, 10.0) - 1e-6).abs() < 1e-15);
    }
}
