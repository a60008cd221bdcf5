//! Flat key-value results. Text output is one `key: value` line per entry;
//! the JSON form is a single object with the same keys.
//!
//! Numbers are printed with Rust's shortest round-trip formatting (exponent
//! form for very small or large magnitudes), vectors
//! as comma-separated lists in text and arrays in JSON. Non-finite numbers
//! become `null` in JSON.

use std::io::Write;

use serde_json::{Map, Number, Value as Json};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
    Floats(Vec<f64>),
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<&[f64]> for Value {
    fn from(v: &[f64]) -> Self {
        Value::Floats(v.to_vec())
    }
}

impl From<Vec<f64>> for Value {
    fn from(v: Vec<f64>) -> Self {
        Value::Floats(v)
    }
}

fn float_json(v: f64) -> Json {
    Number::from_f64(v).map_or(Json::Null, Json::Number)
}

impl Value {
    fn to_json(&self) -> Json {
        match self {
            Value::Int(v) => Json::from(*v),
            Value::Float(v) => float_json(*v),
            Value::Bool(v) => Json::Bool(*v),
            Value::Text(v) => Json::String(v.clone()),
            Value::Floats(v) => Json::Array(v.iter().map(|x| float_json(*x)).collect()),
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(v) => f.write_str(v),
            Value::Floats(v) => {
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x:?}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn entries(&self) -> &[(String, Value)] {
        &self.entries
    }

    pub fn write_text(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for (k, v) in &self.entries {
            writeln!(out, "{k}: {v}")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Json {
        let mut map = Map::new();
        for (k, v) in &self.entries {
            map.insert(k.clone(), v.to_json());
        }
        Json::Object(map)
    }

    pub fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
        writeln!(out)
    }
}

/// Lossless decimal text: 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json_agree_on_keys() {
        let mut r = Report::new();
        r.push("p", 3usize);
        r.push("alpha", vec![2.0, 0.5]);
        r.push("uniform", false);
        r.push("mode", "undefined");
        r.push("bad", f64::NAN);
        r.push("tiny", 1.5e-9);
        let mut text = Vec::new();
        r.write_text(&mut text).unwrap();
        assert_eq!(
            String::from_utf8(text).unwrap(),
            "p: 3\nalpha: 2.0,0.5\nuniform: false\nmode: undefined\nbad: NaN\ntiny: 1.5e-9\n"
        );
        let json = r.to_json();
        assert_eq!(json["p"], 3);
        assert_eq!(json["alpha"][1], 0.5);
        assert!(json["bad"].is_null());
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [
            0.1,
            1.0 / 3.0,
            0.5773502691896257,
            1e-300,
            0.9999999999999999,
        ] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
    }
}
