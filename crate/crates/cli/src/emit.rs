//! Deterministic artifact emission.
//!
//! All floating-point values are written with 17 significant digits
//! (`{:.16e}`), line endings are LF, and JSON object keys are emitted in
//! sorted order, so identical runs produce byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// 17-significant-digit scientific notation; round-trips any finite `f64`.
pub fn fmt_f64(x: f64) -> String {
    // Normalize the sign of zero so -0.0 and 0.0 emit identically.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn write_json_value(out: &mut String, v: &Value, indent: usize) {
    const STEP: usize = 2;
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                out.push_str(&fmt_f64(n.as_f64().expect("number is one of u64/i64/f64")));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("strings always serialize"))
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&" ".repeat(indent + STEP));
                write_json_value(out, item, indent + STEP);
            }
            out.push('\n');
            out.push_str(&" ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            // serde_json's map is a BTreeMap, so iteration is key-sorted.
            for (i, (key, val)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&" ".repeat(indent + STEP));
                out.push_str(&serde_json::to_string(key).expect("strings always serialize"));
                out.push_str(": ");
                write_json_value(out, val, indent + STEP);
            }
            out.push('\n');
            out.push_str(&" ".repeat(indent));
            out.push('}');
        }
    }
}

/// Render any serializable report as deterministic JSON text.
pub fn to_json_text<S: Serialize>(report: &S) -> Result<String, CliError> {
    let value = serde_json::to_value(report)
        .map_err(|e| CliError::Io(format!("serializing report: {e}")))?;
    let mut out = String::new();
    write_json_value(&mut out, &value, 0);
    out.push('\n');
    Ok(out)
}

pub fn write_json<S: Serialize>(path: &Path, report: &S) -> Result<(), CliError> {
    write_text(path, &to_json_text(report)?)
}

/// A CSV table with a fixed header; floats formatted via [`fmt_f64`].
pub struct CsvTable {
    text: String,
    columns: usize,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "CSV row width mismatch");
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// CSV cell for a value that may be absent (empty cell).
pub fn opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    file.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}
