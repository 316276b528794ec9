//! Experiment reports: `{tool_version, command, config_hash, verdict,
//! certificate?, witness?, metrics, timings}`.
//!
//! Everything except `timings` is a pure function of the inputs, so two runs
//! on the same config print byte-identical reports unless `--timings` is set.

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the compact JSON encoding of `config`.
pub fn config_hash(config: &Value) -> String {
    hex::encode(Sha256::digest(config.to_string().as_bytes()))
}

pub fn bytes_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report values serialize")
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub verdict: String,
    pub certificate: Option<Value>,
    pub witness: Option<Value>,
    pub metrics: Value,
    pub timings: Option<Value>,
}

impl Report {
    pub fn new(command: &'static str, config: Value, verdict: impl Into<String>) -> Self {
        Report {
            command,
            config,
            verdict: verdict.into(),
            certificate: None,
            witness: None,
            metrics: Value::Object(Map::new()),
            timings: None,
        }
    }

    pub fn certificate(mut self, v: Value) -> Self {
        self.certificate = Some(v);
        self
    }

    pub fn witness(mut self, v: Value) -> Self {
        self.witness = Some(v);
        self
    }

    pub fn metrics(mut self, v: Value) -> Self {
        self.metrics = v;
        self
    }

    pub fn to_value(&self) -> Value {
        let mut out = Map::new();
        out.insert("tool_version".into(), json!(TOOL_VERSION));
        out.insert("command".into(), json!(self.command));
        out.insert("config_hash".into(), json!(config_hash(&self.config)));
        out.insert("verdict".into(), json!(self.verdict));
        if let Some(c) = &self.certificate {
            out.insert("certificate".into(), c.clone());
        }
        if let Some(w) = &self.witness {
            out.insert("witness".into(), w.clone());
        }
        out.insert("metrics".into(), self.metrics.clone());
        out.insert("timings".into(), self.timings.clone().unwrap_or(Value::Null));
        Value::Object(out)
    }

    /// Pretty JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }
}
