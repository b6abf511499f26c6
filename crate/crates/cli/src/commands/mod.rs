pub mod demo;
pub mod eval;
pub mod loss;
pub mod train;
pub mod verify;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use wsol_core::io::{read_multilabel_csv, read_series_csv};
use wsol_core::{LabeledSeries, MultilabelSeries};

use crate::exit::{Failure, Outcome};

pub enum Data {
    Binary(LabeledSeries<f64>),
    Multilabel(MultilabelSeries<f64>),
}

pub fn open(path: &Path) -> Outcome<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(Failure::input)
}

/// Reads a binary or multilabel series, chosen by the header.
pub fn read_data(path: &Path) -> Outcome<Data> {
    let mut header = String::new();
    open(path)?.read_line(&mut header)?;
    let multilabel = header.split(',').any(|h| h.trim() == "label_1");
    let data = if multilabel {
        Data::Multilabel(read_multilabel_csv(open(path)?)?)
    } else {
        Data::Binary(read_series_csv(open(path)?)?.series)
    };
    Ok(data)
}

pub fn write_text(path: &Path, text: &str) -> Outcome<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::input)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Outcome<()> {
    let text = serde_json::to_string_pretty(value).map_err(Failure::input)?;
    write_text(path, &(text + "\n"))
}
