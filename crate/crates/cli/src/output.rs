//! Deterministic file output: sorted JSON keys and numbers rounded to six
//! significant digits.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

pub fn sig6(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.5e}").parse().unwrap_or(v)
}

pub fn num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    let r = sig6(v);
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn round(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|f| serde_json::Number::from_f64(sig6(f)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(round).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round(v))).collect()),
        other => other,
    }
}

pub fn json_string(value: &impl Serialize) -> Result<String> {
    let v = round(serde_json::to_value(value)?);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    fs::write(path, json_string(value)?).with_context(|| format!("writing {}", path.display()))
}

pub fn write_csv(path: Option<&Path>, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut buf = csv::Writer::from_writer(Vec::new());
    buf.write_record(header)?;
    for r in rows {
        buf.write_record(r)?;
    }
    let bytes = buf.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(num(30.64), "30.64");
        assert_eq!(num(0.1234567891), "0.123457");
        assert_eq!(num(123456789.0), "123457000");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(1e-9 / 3.0), "0.000000000333333");
    }

    #[test]
    fn json_keys_sorted_and_rounded() {
        let v = serde_json::json!({ "b": 1.0 / 3.0, "a": [2.0f64.sqrt(), 7] });
        assert_eq!(
            json_string(&v).unwrap(),
            "{\n  \"a\": [\n    1.41421,\n    7\n  ],\n  \"b\": 0.333333\n}\n"
        );
    }
}
