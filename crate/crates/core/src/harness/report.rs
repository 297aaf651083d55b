//! Bit-stable report emission.
//!
//! JSON objects are written with sorted keys and every float with 17
//! significant digits, so equal reports produce identical bytes and
//! floats survive a round trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use super::experiments::ExperimentReport;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(format!(
                "unknown report format `{s}` (expected json or csv)"
            )),
        }
    }
}

/// Column order of the CSV report.
pub const CSV_COLUMNS: [&str; 8] = [
    "instance",
    "lambda_frac",
    "pair_strategy",
    "ball",
    "radius",
    "contains_ustar",
    "screened",
    "time_ms",
];

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_json(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, k: usize| out.extend(std::iter::repeat_n(' ', 2 * k));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else {
                out.push_str(&format_float(n.as_f64().expect("json numbers are finite")));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_json(out, item, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(key).expect("strings serialize"));
                out.push_str(": ");
                write_json(out, &map[*key], indent + 1);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Any serializable value in the stable JSON layout.
pub fn to_stable_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_json(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

/// One row per (instance, pair, ball) record.
pub fn to_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in &report.records {
        w.write_record([
            r.instance.clone(),
            format_float(r.lambda_frac),
            r.pair_strategy.clone(),
            r.ball.as_str().to_string(),
            format_float(r.radius),
            r.contains_ustar.to_string(),
            r.screened.to_string(),
            r.time_ms.map(format_float).unwrap_or_default(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One row per dynamic-screening event; baseline runs get a single row
/// without an iteration.
pub fn dynamic_to_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "instance",
        "lambda_frac",
        "ball",
        "iteration",
        "screened",
        "shadow_screened",
        "time_ms",
    ])?;
    for d in &report.dynamic {
        let ball = d.ball.map(|b| b.as_str()).unwrap_or("none");
        let time = d.time_ms.map(format_float).unwrap_or_default();
        if d.events.is_empty() {
            w.write_record([
                d.instance.as_str(),
                &format_float(d.lambda_frac),
                ball,
                "",
                "0",
                "",
                &time,
            ])?;
        }
        for e in &d.events {
            w.write_record([
                d.instance.as_str(),
                &format_float(d.lambda_frac),
                ball,
                &e.iteration.to_string(),
                &e.screened.to_string(),
                &e.shadow_screened.map(|s| s.to_string()).unwrap_or_default(),
                &time,
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// CSV output lists ball records when there are any, dynamic events otherwise.
pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => to_stable_json(report),
        ReportFormat::Csv if report.records.is_empty() && !report.dynamic.is_empty() => {
            dynamic_to_csv(report)
        }
        ReportFormat::Csv => to_csv(report),
    }
}

pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    fs::write(path, render_report(report, format)?)?;
    Ok(())
}

pub fn parse_report_json(text: &str) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(text)?)
}
