//! Run reports: deterministic JSON and a short human-readable rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use skcomm::rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    /// Input name to `sha256:<hex>` digest.
    pub inputs: BTreeMap<String, String>,
    pub results: Value,
    pub passed: bool,
    pub seed: Option<u64>,
    pub version: String,
}

impl RunReport {
    pub fn new(command: Vec<String>, results: Value, passed: bool) -> Self {
        Self {
            command,
            inputs: BTreeMap::new(),
            results,
            passed,
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn with_input(mut self, name: &str, bytes: &[u8]) -> Self {
        self.inputs.insert(name.to_string(), digest(bytes));
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "skcomm {}: {}", self.version, self.command.join(" ")).unwrap();
        for (name, d) in &self.inputs {
            writeln!(out, "input {name}: {d}").unwrap();
        }
        if let Some(seed) = self.seed {
            writeln!(out, "seed: {seed}").unwrap();
        }
        render(&mut out, "", &self.results, 0);
        writeln!(out, "status: {}", if self.passed { "PASS" } else { "FAIL" }).unwrap();
        out
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

/// `"p/q"` strings become `decimal (p/q)` with six places.
fn scalar(s: &str) -> String {
    if s.contains('/') {
        if let Ok(r) = rational::parse(s) {
            let exact = if r.is_integer() { r.to_integer().to_string() } else { s.to_string() };
            return format!("{:.6} ({exact})", rational::to_f64(&r));
        }
    }
    s.to_string()
}

fn render(out: &mut String, key: &str, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    let label = if key.is_empty() { String::new() } else { format!("{key}: ") };
    match v {
        Value::Object(map) => {
            if !key.is_empty() {
                writeln!(out, "{pad}{key}:").unwrap();
            }
            let inner = if key.is_empty() { depth } else { depth + 1 };
            for (k, x) in map {
                // Per-trial details and transcripts stay in the JSON report.
                if k == "trials" || k == "transcript" {
                    continue;
                }
                render(out, k, x, inner);
            }
        }
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let parts: Vec<String> = items.iter().map(plain).collect();
            writeln!(out, "{pad}{label}[{}]", parts.join(", ")).unwrap();
        }
        Value::Array(items) => {
            writeln!(out, "{pad}{key}:").unwrap();
            for (i, x) in items.iter().enumerate() {
                render(out, &format!("[{i}]"), x, depth + 1);
            }
        }
        other => writeln!(out, "{pad}{label}{}", plain(other)).unwrap(),
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => scalar(s),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}
