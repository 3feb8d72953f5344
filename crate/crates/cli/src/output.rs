use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// The full record written for one run: command, the config that produced it,
/// and the result.
pub fn envelope(command: &str, config: &impl Serialize, result: Value) -> Result<Value> {
    Ok(json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(config)?,
        "result": result,
    }))
}

pub fn render(doc: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(doc)? + "\n"),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", doc, &mut rows);
            let mut out = String::from("key,value\n");
            for (k, v) in rows {
                out.push_str(&csv_field(&k));
                out.push(',');
                out.push_str(&csv_field(&v));
                out.push('\n');
            }
            Ok(out)
        }
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, x)| flatten(&key(k), x, rows)),
        Value::Array(xs) => xs.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_flattens_nested_values() {
        let doc = json!({"a": {"b": [1.5, 2]}, "s": "x,y", "n": null});
        let text = render(&doc, Format::Csv).unwrap();
        assert_eq!(text, "key,value\na.b.0,1.5\na.b.1,2\nn,\ns,\"x,y\"\n");
    }

    #[test]
    fn floats_round_trip() {
        let x: f64 = 0.1 + 0.2;
        let text = render(&json!({ "x": x }), Format::Json).unwrap();
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64().unwrap().to_bits(), x.to_bits());
    }
}
