//! Reproducible reports: input digests, command echo, result sections and
//! warnings, rendered as sorted-key JSON or as plain text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const SIGNIFICANT_DIGITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Text,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    /// Input label (as given on the command line) to SHA-256 hex digest.
    pub inputs: BTreeMap<String, String>,
    pub sections: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub warnings: BTreeSet<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v)
}

fn round_value(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig(n.as_f64().unwrap_or(0.0));
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.iter().map(|(k, v)| (k.clone(), round_value(v))).collect::<Map<_, _>>()),
        other => other.clone(),
    }
}

impl Report {
    pub fn new(tool: impl Into<String>, version: impl Into<String>, command: Vec<String>) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            tool: tool.into(),
            version: version.into(),
            command,
            inputs: BTreeMap::new(),
            sections: BTreeMap::new(),
            warnings: BTreeSet::new(),
        }
    }

    pub fn add_input(&mut self, label: impl Into<String>, path: impl AsRef<Path>) -> Result<()> {
        self.inputs.insert(label.into(), digest_file(path)?);
        Ok(())
    }

    pub fn add_section<T: Serialize>(&mut self, name: impl Into<String>, value: &T) -> Result<()> {
        let v = serde_json::to_value(value).map_err(|e| Error::Invalid(format!("section does not serialize: {e}")))?;
        self.sections.insert(name.into(), v);
        Ok(())
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.insert(message.into());
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text).map_err(|e| Error::Parse(format!("report: {e}")))?;
        if r.schema != SCHEMA_VERSION {
            return Err(Error::Invalid(format!("unsupported report schema {}", r.schema)));
        }
        Ok(r)
    }
}

fn text_scalar(v: &Value) -> String {
    match v {
        Value::Null => "null".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{}", round_sig(f)),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Array(_) | Value::Object(_) => unreachable!("flattened"),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, child) in map {
                flatten(&format!("{prefix}.{k}"), child, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            let parts: Vec<String> = items.iter().map(text_scalar).collect();
            let _ = writeln!(out, "{prefix}: [{}]", parts.join(", "));
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, out);
            }
        }
        Value::Object(_) => {
            let _ = writeln!(out, "{prefix}: {{}}");
        }
        scalar => {
            let _ = writeln!(out, "{prefix}: {}", text_scalar(scalar));
        }
    }
}

/// Renders a report. Both formats carry the same numbers, rounded to
/// [`SIGNIFICANT_DIGITS`] significant digits; an empty warning set is omitted.
pub fn emit_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Structured => {
            let v = round_value(&serde_json::to_value(report).expect("report serializes"));
            let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
            s.push('\n');
            s
        }
        ReportFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "{} {} (report schema {})", report.tool, report.version, report.schema);
            let _ = writeln!(out, "command: {}", report.command.join(" "));
            for (label, digest) in &report.inputs {
                let _ = writeln!(out, "input {label}: sha256 {digest}");
            }
            for (name, value) in &report.sections {
                let _ = writeln!(out, "\n[{name}]");
                let mut body = String::new();
                flatten("", value, &mut body);
                for line in body.lines() {
                    out.push_str(line.strip_prefix('.').unwrap_or(line));
                    out.push('\n');
                }
            }
            if !report.warnings.is_empty() {
                let _ = writeln!(out, "\nwarnings:");
                for w in &report.warnings {
                    let _ = writeln!(out, "  - {w}");
                }
            }
            out
        }
    }
}
