//! Machine-readable output record shared by every subcommand.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

/// One command invocation's parameters and results. Keys are sorted
/// (BTreeMap) and floats serialize via the shortest round-trip form, so
/// identical inputs give byte-identical JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputRecord {
    pub schema_version: String,
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub results: BTreeMap<String, Value>,
}

impl OutputRecord {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            params: BTreeMap::new(),
            results: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.to_string(), value.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record is always serializable")
    }

    /// Plain aligned listing for terminal use.
    pub fn print_human(&self) {
        println!("{}", self.command);
        let width = self
            .params
            .keys()
            .chain(self.results.keys())
            .map(|k| k.len())
            .max()
            .unwrap_or(0);
        for (k, v) in &self.params {
            println!("  {k:<width$}  {v}");
        }
        if !self.params.is_empty() && !self.results.is_empty() {
            println!("  {}", "-".repeat(width + 2));
        }
        for (k, v) in &self.results {
            println!("  {k:<width$}  {v}");
        }
    }

    pub fn emit(&self, json: bool) {
        if json {
            println!("{}", self.to_json());
        } else {
            self.print_human();
        }
    }
}

/// Wrap a float for JSON; non-finite values become strings so the record
/// stays valid JSON.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(format!("{v}")))
}

pub fn num_list(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|&v| num(v)).collect())
}
