use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wsol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsol"))
        .args(args)
        .env_remove("WSOL_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const VALUE_MAX: &str = r#"{"weights":{"variant":"value_max","omega":[0.6,0.3,0.1]}}"#;

#[test]
fn figure1_files_evaluate_as_claimed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = wsol(&["demo-figure1", "--out-dir", s(d)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cfg = write(d, "cfg.json", VALUE_MAX);
    let mut reports = Vec::new();
    for name in ["series_a", "series_b"] {
        let data = d.join(format!("{name}.csv"));
        let out = d.join(format!("{name}.json"));
        let o = wsol(&["eval", "--data", s(&data), "--config", &cfg, "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        reports.push(read_json(&out));
    }
    let row = |r: &Value| {
        r["sweep"]["rows"]
            .as_array()
            .unwrap()
            .iter()
            .find(|row| (row["tau"].as_f64().unwrap() - 0.5).abs() < 1e-12)
            .unwrap()
            .clone()
    };
    let (a, b) = (row(&reports[0]), row(&reports[1]));
    assert_eq!(a["classical"], b["classical"]);
    assert_eq!(a["classical"], serde_json::json!({"tn": 15, "fp": 4, "fn": 2, "tp": 5}));
    assert_eq!(a["classical_scores"], b["classical_scores"]);
    let wtss = |r: &Value| r["weighted_scores"]["tss"]["value"].as_f64().unwrap();
    assert!(wtss(&a) > wtss(&b));
    let etss = |r: &Value| r["expected"]["weighted_scores"]["tss"]["value"].as_f64().unwrap();
    assert!(etss(&reports[0]) > etss(&reports[1]));

    let fig = read_json(&d.join("figure1.json"));
    assert_eq!(fig["a"]["classical"], fig["b"]["classical"]);
}

#[test]
fn empty_series_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "empty.csv", "label,prediction\n");
    let out = dir.path().join("r.json");
    let o = wsol(&["eval", "--data", &data, "--out", s(&out)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("empty series"), "{}", stderr(&o));
}

#[test]
fn malformed_rows_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    for (name, text) in [
        ("range.csv", "label,prediction\n1,0.4\n0,1.0\n"),
        ("label.csv", "label,prediction\n2,0.4\n"),
        ("column.csv", "y,prediction\n1,0.4\n"),
    ] {
        let data = write(dir.path(), name, text);
        let o = wsol(&["eval", "--data", &data, "--out", s(&out)]);
        assert_eq!(code(&o), 1, "{name}: {}", stderr(&o));
    }
    let o = wsol(&["eval", "--data", s(&dir.path().join("missing.csv")), "--out", s(&out)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn unit_weights_reproduce_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = write(d, "s.csv", "label,prediction\n0,0.2\n1,0.7\n1,0.4\n0,0.9\n0,0.1\n1,0.55\n");
    let cfg = write(d, "cfg.json", r#"{"distribution":{"kind":"beta","alpha":2.0,"beta":3.0},"weights":{"variant":"unit"}}"#);
    let out = d.join("r.json");
    let o = wsol(&["eval", "--data", &data, "--config", &cfg, "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&out);
    assert_eq!(r["expected"]["baseline"], r["expected"]["weighted"]);
    assert_eq!(r["expected"]["baseline_scores"], r["expected"]["weighted_scores"]);
}

#[test]
fn gating_violation_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = write(d, "s.csv", "label,prediction\n0,0.2\n1,0.8\n1,0.4\n0,0.9\n");
    let out = d.join("r.json");
    let narrow = write(
        d,
        "narrow.json",
        r#"{"distribution":{"kind":"uniform","a":0.3,"b":0.7},"weights":{"variant":"value_max","omega":[0.6,0.3,0.1]}}"#,
    );
    let o = wsol(&["eval", "--data", &data, "--config", &narrow, "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("outside the open support"), "{}", stderr(&o));

    let ce = write(
        d,
        "ce.json",
        r#"{"distribution":{"kind":"beta","alpha":2.0,"beta":2.0},"weights":{"variant":"cross_entropy","omega0":1.0,"omega1":1.0}}"#,
    );
    let o = wsol(&["eval", "--data", &data, "--config", &ce, "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unsupported combination"), "{}", stderr(&o));

    let typo = write(d, "typo.json", r#"{"weigths":{"variant":"unit"}}"#);
    let o = wsol(&["eval", "--data", &data, "--config", &typo, "--out", s(&out)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn loss_command_prints_value_and_gradient() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = write(d, "s.csv", "label,prediction\n0,0.2\n1,0.7\n1,0.4\n0,0.9\n0,0.1\n1,0.55\n");
    let cfg = write(d, "cfg.json", r#"{"score":"tss"}"#);
    let grad = d.join("g.csv");
    let o = wsol(&["loss", "--data", &data, "--config", &cfg, "--gradient", s(&grad)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    // Uniform prior, unit weights: E[TP] = Σ y ŷ, E[FN] = Σ y (1 − ŷ), etc.
    let tpr = (0.7 + 0.4 + 0.55) / 3.0;
    let fpr = (0.2 + 0.9 + 0.1) / 3.0;
    assert!((v["value"].as_f64().unwrap() + (tpr - fpr)).abs() < 1e-12);
    let text = std::fs::read_to_string(&grad).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "index,gradient,kink");
    assert_eq!(lines.len(), 7);
    let g1: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((g1 + 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn multilabel_eval_reports_each_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = write(
        d,
        "m.csv",
        "timestamp,label_1,label_2,pred_1,pred_2\nt0,0,1,0.2,0.7\nt1,1,0,0.6,0.3\nt2,1,1,0.8,0.6\nt3,0,0,0.1,0.4\n",
    );
    let out = d.join("r.json");
    let o = wsol(&["eval", "--data", &data, "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&out);
    assert_eq!(r["classes"].as_array().unwrap().len(), 2);
    let per: Vec<f64> = r["classes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["expected"]["weighted_scores"]["tss"]["value"].as_f64().unwrap())
        .collect();
    assert!((r["global_score"].as_f64().unwrap() - 0.5 * (per[0] + per[1])).abs() < 1e-12);
}

#[test]
fn verify_filters_groups() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("v.json");
    let o = wsol(&["verify", "--only", "thm3", "--cases", "20", "--samples", "1000", "--json", s(&json)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&json);
    let results = r["results"].as_array().unwrap();
    assert!(!results.is_empty());
    assert!(results.iter().all(|c| c["group"] == "thm3" && c["passed"] == true));
    assert_eq!(r["config"]["samples"], 1000);
}

#[test]
fn verify_rejects_bad_arguments() {
    let o = wsol(&["verify", "--only", "thm9", "--cases", "5", "--samples", "1000"]);
    assert_eq!(code(&o), 2);
    let o = wsol(&["verify", "--only", "cost", "--cases", "5", "--samples", "10"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_seed_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_wsol"))
        .args(["verify", "--only", "cost", "--cases", "5", "--samples", "1000"])
        .env("WSOL_SEED", "4242")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("seed 4242"));
}

fn train_files(d: &Path) -> (String, String, String) {
    (
        write(d, "synth.json", r#"{"n":120,"seed":99}"#),
        write(d, "wsol.json", r#"{"score":"tss","weights":{"variant":"value_max","omega":[0.6,0.3,0.1]}}"#),
        write(d, "ce.json", r#"{"score":"neg_error_sum","weights":{"variant":"cross_entropy","omega0":1.0,"omega1":1.0}}"#),
    )
}

#[test]
fn training_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (synth, loss, _) = train_files(d);
    let mut histories = Vec::new();
    for run in ["r1", "r2"] {
        let out = d.join(run);
        let o = wsol(&["train", "--synth", &synth, "--loss", &loss, "--epochs", "15", "--seed", "7", "--out-dir", s(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(out.join("checkpoint.json").exists());
        let report = read_json(&out.join("report.json"));
        assert_eq!(report["epochs"], 15);
        histories.push(std::fs::read(out.join("history.csv")).unwrap());
    }
    assert_eq!(histories[0], histories[1]);
    let text = String::from_utf8(histories.pop().unwrap()).unwrap();
    assert_eq!(text.lines().count(), 16);
}

#[test]
fn training_from_dataset_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (_, loss, _) = train_files(d);
    let mut csv = String::from("x1,x2,label\n");
    for i in 0..40 {
        let y = u8::from(i % 5 == 0 || i % 5 == 1);
        csv.push_str(&format!("{},{},{}\n", f64::from(y) - 0.3 + 0.01 * f64::from(i % 7), (i % 3) as f64 * 0.1, y));
    }
    let data = write(d, "data.csv", &csv);
    let out = d.join("out");
    let o = wsol(&["train", "--data", &data, "--loss", &loss, "--epochs", "5", "--hidden", "3", "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ckpt = read_json(&out.join("checkpoint.json"));
    assert_eq!(ckpt["sizes"], serde_json::json!([2, 3, 1]));
}

#[test]
fn training_without_data_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (_, loss, _) = train_files(dir.path());
    let o = wsol(&["train", "--loss", &loss, "--out-dir", s(&dir.path().join("o"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("no dataset"));
}

#[test]
fn divergence_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (synth, loss, _) = train_files(d);
    let cfg = write(d, "cfg.json", r#"{"train":{"optimizer":{"kind":"adam","beta1":0.9,"beta2":0.999,"eps":1e-8}}}"#);
    let o = wsol(&[
        "train", "--synth", &synth, "--loss", &loss, "--config", &cfg, "--epochs", "5", "--lr", "1e308", "--out-dir",
        s(&d.join("o")),
    ]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn paired_runs_write_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (synth, loss, ce) = train_files(d);
    let out = d.join("cmp");
    let o = wsol(&[
        "train", "--synth", &synth, "--loss", &loss, "--baseline", &ce, "--seeds", "2", "--epochs", "10", "--out-dir",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert!(csv.starts_with("seed,"));
    assert!(csv.lines().next().unwrap().contains("improvement"));
    assert_eq!(csv.lines().count(), 3);
    let cmp = read_json(&out.join("comparison.json"));
    assert_eq!(cmp["rows"].as_array().unwrap().len(), 2);
}
