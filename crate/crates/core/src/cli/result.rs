//! Flat, rectangular experiment records serialized as JSON or CSV.
//!
//! JSON is one object with `command`, `tool_version`, `seed`, `parameters`,
//! `summary` and `records`. CSV carries the same data: metadata as leading
//! `# key: value` comment lines, then a header row and one row per record.
//! Floats are written in shortest round-trip form in both.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Row = Map<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub parameters: Map<String, Value>,
    pub summary: Map<String, Value>,
    pub records: Vec<Row>,
}

impl ExperimentResult {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            seed,
            parameters: Map::new(),
            summary: Map::new(),
            records: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn summarize(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.summary.insert(key.to_string(), value.into());
        self
    }

    /// Appends a row; its keys must match the first row's, in order.
    pub fn push(&mut self, row: Row) -> Result<(), CliError> {
        if let Some(first) = self.records.first() {
            if !first.keys().eq(row.keys()) {
                return Err(CliError::Internal(format!(
                    "record keys {:?} differ from {:?}",
                    row.keys().collect::<Vec<_>>(),
                    first.keys().collect::<Vec<_>>()
                )));
            }
        }
        self.records.push(row);
        Ok(())
    }

    pub fn is_rectangular(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[0].keys().eq(w[1].keys()))
    }

    pub fn columns(&self) -> Vec<&str> {
        self.records
            .first()
            .map(|r| r.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    /// Value of `key` in record `row`.
    pub fn cell(&self, row: usize, key: &str) -> Option<&Value> {
        self.records.get(row).and_then(|r| r.get(key))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result is serializable");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = String::new();
        out.push_str(&format!("# command: {}\n", self.command));
        out.push_str(&format!("# tool_version: {}\n", self.tool_version));
        out.push_str(&format!("# seed: {}\n", self.seed));
        for (k, v) in &self.parameters {
            out.push_str(&format!("# parameters.{k}: {}\n", scalar_text(v)));
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# summary.{k}: {}\n", scalar_text(v)));
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Internal(format!("csv: {e}"));
        writer.write_record(self.columns()).map_err(csv_err)?;
        for row in &self.records {
            writer
                .write_record(row.values().map(scalar_text))
                .map_err(csv_err)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::Internal(format!("csv: {e}")))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }
}

/// Plain-text form of a scalar: numbers as JSON writes them, strings unquoted, null empty.
pub fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `f64` as a JSON value; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

#[macro_export]
#[doc(hidden)]
macro_rules! row {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut r = $crate::cli::result::Row::new();
        $( r.insert($k.to_string(), ::serde_json::Value::from($v)); )*
        r
    }};
}
