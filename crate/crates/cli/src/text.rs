//! Plain-text rendering of report documents.

use std::fmt::Write;

use serde_json::Value;

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".to_string(),
        other => other.to_string(),
    }
}

fn field(out: &mut String, indent: usize, key: &str, v: &Value) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(map) => {
            let _ = writeln!(out, "{pad}{key}:");
            for (k, v) in map {
                field(out, indent + 2, k, v);
            }
        }
        Value::Array(items) if items.iter().any(|i| i.is_object()) => {
            let _ = writeln!(out, "{pad}{key}:");
            for (i, item) in items.iter().enumerate() {
                field(out, indent + 2, &format!("[{i}]"), item);
            }
        }
        Value::Array(items) if items.is_empty() => {
            let _ = writeln!(out, "{pad}{key}: (none)");
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(render_inline).collect();
            let _ = writeln!(out, "{pad}{key}: {}", parts.join(", "));
        }
        other => {
            let _ = writeln!(out, "{pad}{key}: {}", scalar(other));
        }
    }
}

fn render_inline(v: &Value) -> String {
    match v {
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(render_inline).collect();
            format!("[{}]", parts.join(", "))
        }
        other => scalar(other),
    }
}

/// Indented `key: value` lines, sections in the given order.
pub fn render(doc: &Value, order: &[&str]) -> String {
    let mut out = String::new();
    if let Value::Object(map) = doc {
        for key in order {
            if let Some(v) = map.get(*key) {
                field(&mut out, 0, key, v);
            }
        }
    }
    out
}
