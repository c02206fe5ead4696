//! Tabular output. Records are JSON objects; exact quantities are stored as
//! decimal strings and floating-point columns carry an `_f64` suffix.

use clap::ValueEnum;
use serde_json::{Map, Value};

use crate::error::CliError;

pub type Record = Map<String, Value>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Column order: keys of the first record in insertion order, then any key
/// first seen in a later record.
fn columns(records: &[Record]) -> Vec<&str> {
    let mut cols: Vec<&str> = Vec::new();
    for r in records {
        for k in r.keys() {
            if !cols.contains(&k.as_str()) {
                cols.push(k);
            }
        }
    }
    cols
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

/// Renders `records` as a JSON array or a CSV table with a header row. Output
/// always ends with a newline.
pub fn emit_report(records: &[Record], format: Format) -> Result<String, CliError> {
    if records.is_empty() {
        return Err(CliError::validation("no records to report"));
    }
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(records).expect("records are plain JSON");
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let cols = columns(records);
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::io(e.to_string());
            w.write_record(&cols).map_err(io)?;
            for r in records {
                w.write_record(cols.iter().map(|c| cell(r.get(*c))))
                    .map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::io(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv of utf-8 cells"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn rec(v: Value) -> Record {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn one_record_is_two_csv_lines() {
        let r = rec(json!({"k": 2, "crossings": "10", "ratio_f64": 0.5, "ok": true}));
        let out = emit_report(&[r], Format::Csv).unwrap();
        assert_eq!(out, "k,crossings,ratio_f64,ok\n2,10,0.5,true\n");
    }

    #[test]
    fn json_round_trips() {
        let rs = vec![
            rec(json!({"n": 1, "s2": "1"})),
            rec(json!({"n": 2, "s2": "2", "note": null})),
        ];
        let out = emit_report(&rs, Format::Json).unwrap();
        let back: Vec<Record> = serde_json::from_str(&out).unwrap();
        assert_eq!(back, rs);
    }

    #[test]
    fn late_columns_are_appended() {
        let rs = vec![
            rec(json!({"b": 1, "a": 2})),
            rec(json!({"b": 3, "c": [1, 2]})),
        ];
        let out = emit_report(&rs, Format::Csv).unwrap();
        assert_eq!(out, "b,a,c\n1,2,\n3,,\"[1,2]\"\n");
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(emit_report(&[], Format::Json).is_err());
    }
}
