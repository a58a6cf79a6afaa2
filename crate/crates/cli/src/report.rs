// SPDX-License-Identifier: Apache-2.0

//! Report rendering. Every number goes out with 12 significant digits so
//! golden files stay stable across platforms.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Text,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(format!(
                "unknown format `{other}`, expected json, csv or text"
            )),
        }
    }
}

/// Round to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Shortest decimal form of `x` rounded to 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        round_significant(x).to_string()
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(num) => {
            if let Some(x) = num.as_f64().filter(|_| num.is_f64()) {
                *v = serde_json::Number::from_f64(round_significant(x))
                    .map_or(Value::Null, Value::Number);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON in field declaration order with rounded floats and a
/// trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let mut value = serde_json::to_value(report).map_err(|e| CliError::Invalid(e.to_string()))?;
    round_value(&mut value);
    let mut out =
        serde_json::to_string_pretty(&value).map_err(|e| CliError::Invalid(e.to_string()))?;
    out.push('\n');
    Ok(out)
}

/// Plain CSV from a header and rows of already formatted cells.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| CliError::Invalid(e.to_string());
    wtr.write_record(header).map_err(to_err)?;
    for row in rows {
        wtr.write_record(row).map_err(to_err)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Invalid(e.to_string()))
}

/// Left-aligned fixed-width table.
pub fn to_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let joined: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", joined.join("  ").trim_end());
    };
    line(header.to_vec(), &mut out);
    for row in rows {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(format_number(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_number(0.2), "0.2");
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(123_456_789.123_456_7), "123456789.123");
        assert_eq!(format_number(f64::INFINITY), "inf");
    }

    #[test]
    fn json_numbers_are_rounded_in_place() {
        #[derive(Serialize)]
        struct R {
            b: f64,
            a: Vec<f64>,
            n: usize,
        }
        let json = to_json(&R {
            b: 1.0 / 3.0,
            a: vec![0.1 + 0.2, f64::NAN],
            n: 3,
        })
        .unwrap();
        assert_eq!(
            json,
            "{\n  \"b\": 0.333333333333,\n  \"a\": [\n    0.3,\n    null\n  ],\n  \"n\": 3\n}\n"
        );
    }

    #[test]
    fn table_layout() {
        let t = to_table(&["id", "score"], &[vec!["alice".into(), "1".into()]]);
        assert_eq!(t, "id     score\nalice  1\n");
    }
}
