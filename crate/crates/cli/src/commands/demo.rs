use std::fs::File;

use serde::Serialize;
use wsol_core::demo::{compare, demo_weights, series_a, series_b, DemoComparison};
use wsol_core::io::write_series_csv;
use wsol_core::{ScoreKind, ScoreRow, WeightSpec};

use super::write_json;
use crate::config::load_config;
use crate::exit::Outcome;
use crate::DemoArgs;

#[derive(Debug, Serialize)]
struct DemoReport {
    weights: WeightSpec<f64>,
    #[serde(flatten)]
    comparison: DemoComparison<f64>,
}

fn row(label: &str, s: &ScoreRow<f64>) -> String {
    let mut line = format!("{label:<22}");
    for k in [ScoreKind::Accuracy, ScoreKind::F1, ScoreKind::Tss, ScoreKind::Hss] {
        line.push_str(&format!(" {:>9.4}", s.get(k).value));
    }
    line
}

pub fn run(args: &DemoArgs) -> Outcome<()> {
    let weights = match &args.config {
        Some(p) => load_config(Some(p))?.weights.unwrap_or_else(demo_weights),
        None => demo_weights(),
    };
    std::fs::create_dir_all(&args.out_dir)?;
    for (name, series) in [("series_a.csv", series_a::<f64>()), ("series_b.csv", series_b())] {
        write_series_csv(File::create(args.out_dir.join(name))?, &series, None)?;
    }
    let comparison = compare(&weights)?;
    let c = &comparison;
    println!("threshold {}", c.threshold);
    for (name, side) in [("A", &c.a), ("B", &c.b)] {
        let m = side.classical;
        println!(
            "{name}: tn={} fp={} fn={} tp={}  wfp={:.4} wfn={:.4}",
            m.tn, m.fp, m.fn_, m.tp, side.weighted.wfp, side.weighted.wfn
        );
    }
    println!("{:<22} {:>9} {:>9} {:>9} {:>9}", "", "accuracy", "f1", "tss", "hss");
    println!("{}", row("A classical", &c.a.classical_scores));
    println!("{}", row("B classical", &c.b.classical_scores));
    println!("{}", row("A weighted", &c.a.weighted_scores));
    println!("{}", row("B weighted", &c.b.weighted_scores));
    println!("{}", row("A expected weighted", &c.a.expected_weighted_scores));
    println!("{}", row("B expected weighted", &c.b.expected_weighted_scores));
    write_json(
        &args.out_dir.join("figure1.json"),
        &DemoReport {
            weights,
            comparison,
        },
    )?;
    Ok(())
}
