use serde::Serialize;
use wsol_core::{
    expected_confusion, loss_value, multilabel_global_score, sweep_report, Aggregator, ConfusionEntries,
    LabeledSeries, MultilabelSeries, MultilabelSpec, ScoreKind, ScoreRow, SweepReport, ThresholdDistribution,
    ThresholdSweep, WeightSpec,
};

use super::{read_data, write_json, write_text, Data};
use crate::config::{load_config, AppConfig};
use crate::exit::{Failure, Outcome};
use crate::EvalArgs;

#[derive(Debug, Serialize)]
struct Expected {
    /// Unit weights under the configured prior.
    baseline: ConfusionEntries<f64>,
    weighted: ConfusionEntries<f64>,
    baseline_scores: ScoreRow<f64>,
    weighted_scores: ScoreRow<f64>,
}

#[derive(Debug, Serialize)]
struct LossSummary {
    value: f64,
    degenerate: bool,
}

#[derive(Debug, Serialize)]
struct BinaryReport {
    samples: usize,
    positives: usize,
    distribution: ThresholdDistribution<f64>,
    weights: WeightSpec<f64>,
    expected: Expected,
    loss: LossSummary,
    sweep: SweepReport<f64>,
}

#[derive(Debug, Serialize)]
struct ClassReport {
    class: usize,
    expected: Expected,
    sweep: SweepReport<f64>,
}

#[derive(Debug, Serialize)]
struct MultilabelReport {
    samples: usize,
    classes: Vec<ClassReport>,
    score: ScoreKind,
    global_score: f64,
    degenerate: bool,
}

fn expected(
    series: &LabeledSeries<f64>,
    dist: &ThresholdDistribution<f64>,
    weights: &WeightSpec<f64>,
) -> Outcome<Expected> {
    let baseline = expected_confusion(series, dist, &WeightSpec::unit())?;
    let weighted = expected_confusion(series, dist, weights)?;
    Ok(Expected {
        baseline_scores: ScoreRow::from_entries(&baseline),
        weighted_scores: ScoreRow::from_entries(&weighted),
        baseline,
        weighted,
    })
}

fn binary(series: &LabeledSeries<f64>, cfg: &AppConfig, sweep: &ThresholdSweep<f64>) -> Outcome<BinaryReport> {
    let dist = cfg.distribution();
    let weights = cfg.weights();
    let expected = expected(series, &dist, &weights)?;
    let loss = cfg.loss();
    let mut value = 0.0;
    let mut degenerate = false;
    for c in loss.components() {
        let v = loss_value(series, &c.spec)?;
        value += c.beta * v.value;
        degenerate |= v.degenerate;
    }
    Ok(BinaryReport {
        samples: series.len(),
        positives: series.positives(),
        sweep: sweep_report(series, sweep, &weights)?,
        distribution: dist,
        weights,
        expected,
        loss: LossSummary { value, degenerate },
    })
}

pub fn multilabel_spec(cfg: &AppConfig, d: usize) -> MultilabelSpec<f64> {
    cfg.multilabel.clone().unwrap_or_else(|| {
        MultilabelSpec::uniform_classes(
            d,
            cfg.distribution(),
            cfg.weights(),
            cfg.score.unwrap_or(ScoreKind::Tss),
            Aggregator::Mean,
        )
    })
}

fn multilabel(data: &MultilabelSeries<f64>, cfg: &AppConfig, sweep: &ThresholdSweep<f64>) -> Outcome<MultilabelReport> {
    let spec = multilabel_spec(cfg, data.classes());
    let global = multilabel_global_score(data, &spec)?;
    let classes = spec
        .classes
        .iter()
        .zip(data.columns())
        .enumerate()
        .map(|(j, (c, series))| {
            Ok(ClassReport {
                class: j + 1,
                expected: expected(series, &c.distribution, &c.weights)?,
                sweep: sweep_report(series, sweep, &c.weights)?,
            })
        })
        .collect::<Outcome<Vec<_>>>()?;
    Ok(MultilabelReport {
        samples: data.len(),
        classes,
        score: spec.score,
        global_score: global.value,
        degenerate: global.degenerate,
    })
}

pub fn run(args: &EvalArgs) -> Outcome<()> {
    let cfg = load_config(args.config.as_deref())?;
    let data = read_data(&args.data)?;
    let sweep = ThresholdSweep::grid(args.steps).map_err(Failure::config)?;
    match data {
        Data::Binary(series) => {
            let report = binary(&series, &cfg, &sweep)?;
            if let Some(path) = &args.csv {
                write_text(path, &report.sweep.to_csv())?;
            }
            write_json(&args.out, &report)?;
            println!(
                "{} samples, {} positives; expected tn={:.4} wfp={:.4} wfn={:.4} tp={:.4}; loss {:.6}",
                report.samples,
                report.positives,
                report.expected.weighted.tn,
                report.expected.weighted.wfp,
                report.expected.weighted.wfn,
                report.expected.weighted.tp,
                report.loss.value
            );
        }
        Data::Multilabel(data) => {
            let report = multilabel(&data, &cfg, &sweep)?;
            if let Some(path) = &args.csv {
                let mut text = String::new();
                for (j, c) in report.classes.iter().enumerate() {
                    for (k, line) in c.sweep.to_csv().lines().enumerate() {
                        if k == 0 && j == 0 {
                            text.push_str(&format!("class,{line}\n"));
                        } else if k > 0 {
                            text.push_str(&format!("{},{line}\n", c.class));
                        }
                    }
                }
                write_text(path, &text)?;
            }
            write_json(&args.out, &report)?;
            println!(
                "{} samples, {} classes; global {} {:.6}",
                report.samples,
                report.classes.len(),
                report.score.name(),
                report.global_score
            );
        }
    }
    Ok(())
}
