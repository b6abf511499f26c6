//! CSV readers and writers for binary and multilabel series.
//!
//! Binary series: `timestamp,label,prediction` (timestamp optional).
//! Multilabel series: `timestamp,label_1..label_d,pred_1..pred_d`.
//! Row order is taken as chronological order; timestamps are carried
//! through but not interpreted.

use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Result, WsolError};
use crate::multilabel::MultilabelSeries;
use crate::num::Scalar;
use crate::series::LabeledSeries;

fn input_err(e: impl std::fmt::Display) -> WsolError {
    WsolError::Input(e.to_string())
}

fn parse_label(raw: &str, row: usize) -> Result<bool> {
    match raw.trim() {
        "1" | "true" | "TRUE" | "True" => Ok(true),
        "0" | "false" | "FALSE" | "False" => Ok(false),
        other => Err(WsolError::Input(format!(
            "row {row}: label must be 0/1, got {other:?}"
        ))),
    }
}

fn parse_scalar<T: Scalar>(raw: &str, row: usize, what: &str) -> Result<T> {
    let v = f64::from_str(raw.trim())
        .map_err(|_| WsolError::Input(format!("row {row}: bad {what} {raw:?}")))?;
    Ok(T::lit(v))
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| WsolError::Input(format!("missing column {name:?}")))
}

/// Binary series with its optional timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFile<T: Scalar> {
    pub timestamps: Option<Vec<String>>,
    pub series: LabeledSeries<T>,
}

pub fn read_series_csv<T: Scalar, R: Read>(reader: R) -> Result<SeriesFile<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(input_err)?.clone();
    let label_col = column(&headers, "label")?;
    let pred_col = column(&headers, "prediction")?;
    let ts_col = headers.iter().position(|h| h == "timestamp");
    let mut labels = Vec::new();
    let mut preds = Vec::new();
    let mut stamps = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(input_err)?;
        labels.push(parse_label(&rec[label_col], row)?);
        preds.push(parse_scalar(&rec[pred_col], row, "prediction")?);
        if let Some(c) = ts_col {
            stamps.push(rec[c].to_string());
        }
    }
    Ok(SeriesFile {
        timestamps: ts_col.map(|_| stamps),
        series: LabeledSeries::new(preds, labels)?,
    })
}

pub fn write_series_csv<T: Scalar, W: Write>(
    writer: W,
    series: &LabeledSeries<T>,
    timestamps: Option<&[String]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| WsolError::Input(e.to_string());
    match timestamps {
        Some(_) => w.write_record(["timestamp", "label", "prediction"]),
        None => w.write_record(["label", "prediction"]),
    }
    .map_err(io)?;
    for i in 0..series.len() {
        let label = if series.label(i) { "1" } else { "0" };
        let pred = series.prediction(i).to_string();
        match timestamps {
            Some(ts) => w.write_record([ts[i].as_str(), label, pred.as_str()]),
            None => w.write_record([label, pred.as_str()]),
        }
        .map_err(io)?;
    }
    w.flush().map_err(|e| WsolError::Input(e.to_string()))
}

pub fn read_multilabel_csv<T: Scalar, R: Read>(reader: R) -> Result<MultilabelSeries<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(input_err)?.clone();
    let d = headers.iter().filter(|h| h.starts_with("label_")).count();
    let label_cols = (1..=d)
        .map(|j| column(&headers, &format!("label_{j}")))
        .collect::<Result<Vec<_>>>()?;
    let pred_cols = (1..=d)
        .map(|j| column(&headers, &format!("pred_{j}")))
        .collect::<Result<Vec<_>>>()?;
    let mut labels = Vec::new();
    let mut preds = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(input_err)?;
        labels.push(
            label_cols
                .iter()
                .map(|&c| parse_label(&rec[c], row))
                .collect::<Result<Vec<_>>>()?,
        );
        preds.push(
            pred_cols
                .iter()
                .map(|&c| parse_scalar(&rec[c], row, "prediction"))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if labels.is_empty() {
        return Err(WsolError::EmptySeries);
    }
    MultilabelSeries::from_rows(&labels, &preds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip() {
        let s = LabeledSeries::from_binary(vec![0.25, 0.75, 0.5], &[0, 1, 1]).unwrap();
        let ts: Vec<String> = ["t0", "t1", "t2"].iter().map(|s| s.to_string()).collect();
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &s, Some(&ts)).unwrap();
        let back: SeriesFile<f64> = read_series_csv(buf.as_slice()).unwrap();
        assert_eq!(back.series, s);
        assert_eq!(back.timestamps.unwrap(), ts);
    }

    #[test]
    fn timestamp_is_optional() {
        let f: SeriesFile<f64> = read_series_csv("label,prediction\n1,0.9\n0,0.1\n".as_bytes()).unwrap();
        assert!(f.timestamps.is_none());
        assert_eq!(f.series.len(), 2);
    }

    #[test]
    fn malformed_inputs() {
        let empty = read_series_csv::<f64, _>("label,prediction\n".as_bytes());
        assert_eq!(empty.unwrap_err(), WsolError::EmptySeries);
        assert!(read_series_csv::<f64, _>("label,prediction\n2,0.5\n".as_bytes()).is_err());
        assert!(read_series_csv::<f64, _>("label,prediction\n1,1.5\n".as_bytes()).is_err());
        assert!(read_series_csv::<f64, _>("label\n1\n".as_bytes()).is_err());
        assert!(read_series_csv::<f64, _>("label,prediction\n1,abc\n".as_bytes()).is_err());
    }

    #[test]
    fn multilabel_columns() {
        let text = "timestamp,label_1,label_2,pred_1,pred_2\n0,1,0,0.8,0.3\n1,1,1,0.6,0.7\n2,0,0,0.2,0.1\n";
        let m: MultilabelSeries<f64> = read_multilabel_csv(text.as_bytes()).unwrap();
        assert_eq!(m.classes(), 2);
        assert_eq!(m.len(), 3);
        assert_eq!(m.column(1).predictions(), &[0.3, 0.7, 0.1]);
        assert!(m.column(0).label(1) && m.column(1).label(1));
        let single = "label_1,pred_1\n1,0.5\n";
        assert!(read_multilabel_csv::<f64, _>(single.as_bytes()).is_err());
    }
}
