//! One analysis per input line, in parallel, reported in input order.

use std::io::BufRead;

use rayon::prelude::*;
use serde_json::Value;

use crate::error::CliError;
use crate::input::parse_line;
use crate::report::{error_value, to_value, Pipeline, Settings};

/// Analyses every non-blank line not starting with `#`. A failing line
/// yields an error object carrying its 1-based line number and text.
pub fn run_batch<R: BufRead>(reader: R, settings: &Settings) -> Result<Vec<Value>, CliError> {
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        lines.push((i + 1, trimmed.to_string()));
    }
    Ok(lines
        .par_iter()
        .map(|(number, text)| {
            let result = parse_line(text)
                .and_then(|input| Pipeline::new(input, settings.clone()))
                .and_then(|p| p.report());
            match result {
                Ok(report) => to_value(&report),
                Err(e) => {
                    let mut v = error_value(&e);
                    v["line"] = Value::from(*number);
                    v["input"] = Value::from(text.clone());
                    v
                }
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> Vec<Value> {
        run_batch(text.as_bytes(), &Settings::default()).unwrap()
    }

    #[test]
    fn order_preserved() {
        let out = run("--word 1,1;1,1\n--matrix 2,1,1,1\n--word 2,1\n");
        assert_eq!(out.len(), 3);
        let n: Vec<_> = out.iter().map(|v| v["triangulation"]["n"].as_u64().unwrap()).collect();
        assert_eq!(n, [4, 2, 3]);
    }

    #[test]
    fn malformed_line_inline() {
        let out = run("--word 1,1\n--matrix 1,2\n--word 1,2\n");
        assert_eq!(out.len(), 3);
        assert!(out[0].get("error").is_none());
        assert_eq!(out[1]["error"]["kind"], "ParseError");
        assert_eq!(out[1]["line"], 2);
        assert_eq!(out[1]["input"], "--matrix 1,2");
        assert!(out[2].get("error").is_none());
    }

    #[test]
    fn empty_and_comments() {
        assert!(run("").is_empty());
        assert!(run("# header\n\n   \n").is_empty());
    }
}
