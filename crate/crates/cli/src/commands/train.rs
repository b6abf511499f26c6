use anyhow::anyhow;
use serde::Serialize;
use wsol_core::{CombinedLossSpec, LossConfig, SweepReport, ThresholdSweep};
use wsol_trainer::{
    compare_losses, evaluate, generate_temporal_dataset, read_dataset_csv, train, EpochRecord, ExperimentConfig,
    Mlp, SyntheticSeriesConfig, TemporalDataset, TrainConfig,
};

use super::{open, write_json, write_text};
use crate::config::{load_config, load_json, TrainSection};
use crate::exit::{Failure, Outcome};
use crate::TrainArgs;

#[derive(Debug, Serialize)]
struct TrainReport {
    seed: u64,
    samples: usize,
    positives: usize,
    threshold: f64,
    epochs: usize,
    final_epoch: Option<EpochRecord<f64>>,
    sweep: SweepReport<f64>,
}

fn settings(args: &TrainArgs) -> Outcome<TrainSection> {
    let mut s = load_config(args.config.as_deref())?.train.unwrap_or_default();
    if let Some(e) = args.epochs {
        s.epochs = e;
    }
    if let Some(lr) = args.lr {
        s.learning_rate = lr;
    }
    if let Some(h) = &args.hidden {
        s.hidden = h.clone();
    }
    Ok(s)
}

fn load_loss(path: &std::path::Path) -> Outcome<CombinedLossSpec<f64>> {
    Ok(load_json::<LossConfig<f64>>(path)?.into_combined())
}

fn load_synth(args: &TrainArgs) -> Outcome<Option<SyntheticSeriesConfig>> {
    args.synth.as_deref().map(load_json).transpose()
}

fn dataset(args: &TrainArgs, synth: Option<SyntheticSeriesConfig>) -> Outcome<TemporalDataset<f64>> {
    match (synth, &args.data) {
        (Some(s), _) => Ok(generate_temporal_dataset(&SyntheticSeriesConfig {
            seed: args.seed,
            ..s
        })?),
        (None, Some(path)) => Ok(read_dataset_csv(open(path)?)?),
        (None, None) => Err(Failure::input(anyhow!("no dataset: pass --data <csv> or --synth <json>"))),
    }
}

fn single(args: &TrainArgs, s: &TrainSection, loss: CombinedLossSpec<f64>) -> Outcome<()> {
    let data = dataset(args, load_synth(args)?)?;
    let mut sizes = vec![data.feature_dim()];
    sizes.extend_from_slice(&s.hidden);
    sizes.push(1);
    let init = Mlp::new(&sizes, s.activation, args.seed)?;
    let cfg = TrainConfig {
        epochs: s.epochs,
        learning_rate: s.learning_rate,
        batching: s.batching,
        optimizer: s.optimizer,
        loss,
        eval_weights: s.eval_weights.clone(),
    };
    let (model, history) = train(&init, &data, &cfg)?;
    let sweep = evaluate(&model, &data, &ThresholdSweep::default(), &cfg.eval_weights)?;
    let report = TrainReport {
        seed: args.seed,
        samples: data.len(),
        positives: data.positives(),
        threshold: history.threshold,
        epochs: history.epochs.len(),
        final_epoch: history.last().copied(),
        sweep,
    };
    write_json(&args.out_dir.join("checkpoint.json"), &model)?;
    write_text(&args.out_dir.join("history.csv"), &history.to_csv())?;
    write_json(&args.out_dir.join("report.json"), &report)?;
    if let Some(last) = &report.final_epoch {
        println!(
            "epoch {}: loss {:.6}, tss {:.4}, weighted tss {:.4} at tau {:.3}",
            last.epoch, last.loss, last.classical.tss, last.weighted.tss, report.threshold
        );
    }
    Ok(())
}

fn paired(args: &TrainArgs, s: &TrainSection, candidate: CombinedLossSpec<f64>, baseline: &std::path::Path) -> Outcome<()> {
    let baseline = load_loss(baseline)?;
    let synth = load_synth(args)?.ok_or_else(|| {
        Failure::input(anyhow!("paired runs generate their data: pass --synth <json>"))
    })?;
    let exp = ExperimentConfig {
        synth,
        hidden: s.hidden.clone(),
        activation: s.activation,
        epochs: s.epochs,
        learning_rate: s.learning_rate,
        optimizer: s.optimizer,
        batching: s.batching,
        seeds: (0..args.seeds).map(|k| args.seed + k).collect(),
    };
    let cmp = compare_losses(&exp, &baseline, &candidate, &s.eval_weights)?;
    write_text(&args.out_dir.join("comparison.csv"), &cmp.to_csv())?;
    write_json(&args.out_dir.join("comparison.json"), &cmp)?;
    println!("{:>6} {:>12} {:>12} {:>12}", "seed", "baseline", "candidate", "improvement");
    for r in &cmp.rows {
        println!(
            "{:>6} {:>12.4} {:>12.4} {:>+12.4}",
            r.seed, r.baseline_weighted.tss, r.candidate_weighted.tss, r.improvement
        );
    }
    println!(
        "{:>6} {:>12.4} {:>12.4} {:>+12.4}",
        "median", cmp.median_baseline_weighted_tss, cmp.median_candidate_weighted_tss, cmp.median_improvement
    );
    Ok(())
}

pub fn run(args: &TrainArgs) -> Outcome<()> {
    let s = settings(args)?;
    let loss = load_loss(&args.loss)?;
    std::fs::create_dir_all(&args.out_dir)?;
    match &args.baseline {
        Some(b) => paired(args, &s, loss, b),
        None => single(args, &s, loss),
    }
}
