//! Payload tables and the JSON record written beside every output file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Format};
use crate::CliError;

/// Result of one command: a table for files and a summary for the terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub table: Table,
    /// Set when a check in the table did not hold.
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// One object per row, keyed by header.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self.headers.iter().cloned().zip(row.iter().cloned()).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Shortest decimal that keeps 12 significant digits, always with a point.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{:.12}", x);
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct ResultRecord<'a> {
    command: &'a str,
    version: &'a str,
    config_hash: String,
    timestamp_unix: u64,
    wall_seconds: f64,
    output: &'a Path,
    config: &'a ExperimentConfig,
    payload: Value,
}

/// SHA-256 of the canonical config, excluding thread count and output path,
/// which do not affect results.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut canonical = config.clone();
    canonical.global.threads = None;
    canonical.global.out = None;
    let text = serde_json::to_string(&canonical).expect("config serializes");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

pub fn write(
    out: &Path,
    format: Format,
    command: &str,
    config: &ExperimentConfig,
    outcome: &Outcome,
    wall_seconds: f64,
) -> Result<(), CliError> {
    let body = match format {
        Format::Csv => outcome.table.to_csv()?,
        Format::Json => serde_json::to_string_pretty(&outcome.table.to_json())? + "\n",
    };
    let timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let record = ResultRecord {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config_hash(config),
        timestamp_unix,
        wall_seconds,
        output: out,
        config,
        payload: outcome.table.to_json(),
    };
    fs::write(out, body)?;
    fs::write(sidecar_path(out), serde_json::to_string_pretty(&record)? + "\n")?;
    Ok(())
}
