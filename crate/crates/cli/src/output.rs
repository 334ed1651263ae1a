//! Report rows and their JSON, CSV and text renderings.
//!
//! Floats are printed with 17 significant digits in every format, so equal
//! inputs give byte-identical output. Non-finite floats become `null` in
//! JSON and empty fields in CSV.

use std::io::Write;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    List(Vec<Value>),
    Null,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl<T: Into<Value> + Clone> From<&[T]> for Value {
    fn from(v: &[T]) -> Self {
        Value::List(v.iter().cloned().map(Into::into).collect())
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map(Into::into).unwrap_or(Value::Null)
    }
}

pub fn fmt_float(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.16e}"))
}

impl Value {
    fn plain(&self) -> String {
        match self {
            Value::Float(x) => fmt_float(*x).unwrap_or_default(),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Str(s) => s.clone(),
            Value::List(v) => v.iter().map(Value::plain).collect::<Vec<_>>().join(";"),
            Value::Null => String::new(),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Float(x) => match fmt_float(*x) {
                Some(t) => RawValue::from_string(t).map_err(serde::ser::Error::custom)?.serialize(s),
                None => s.serialize_none(),
            },
            Value::Int(i) => s.serialize_i64(*i),
            Value::Bool(b) => s.serialize_bool(*b),
            Value::Str(t) => s.serialize_str(t),
            Value::List(v) => {
                let mut seq = s.serialize_seq(Some(v.len()))?;
                for x in v {
                    seq.serialize_element(x)?;
                }
                seq.end()
            }
            Value::Null => s.serialize_none(),
        }
    }
}

/// Ordered key-value record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row(pub Vec<(&'static str, Value)>);

impl Row {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn with(mut self, key: &'static str, v: impl Into<Value>) -> Self {
        self.0.push((key, v.into()));
        self
    }
}

impl Serialize for Row {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

struct Rows<'a>(&'a [Row]);

impl Serialize for Rows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for r in self.0 {
            seq.serialize_element(r)?;
        }
        seq.end()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: &'static str,
    pub params: Row,
    pub rows: Vec<Row>,
    pub checks: Vec<Row>,
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(4))?;
        m.serialize_entry("command", self.command)?;
        m.serialize_entry("params", &self.params)?;
        m.serialize_entry("rows", &Rows(&self.rows))?;
        m.serialize_entry("checks", &Rows(&self.checks))?;
        m.end()
    }
}

impl Report {
    pub fn render(&self, format: Format) -> std::io::Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut v = serde_json::to_vec_pretty(self).map_err(std::io::Error::other)?;
                v.push(b'\n');
                Ok(v)
            }
            Format::Csv => self.csv(),
            Format::Text => Ok(self.text().into_bytes()),
        }
    }

    /// Rows as records; checks follow as a second table when there are any.
    fn csv(&self) -> std::io::Result<Vec<u8>> {
        let mut buf = Vec::new();
        for table in [&self.rows, &self.checks] {
            if table.is_empty() {
                continue;
            }
            if !buf.is_empty() {
                buf.push(b'\n');
            }
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(table[0].0.iter().map(|(k, _)| *k))?;
            for r in table.iter() {
                w.write_record(r.0.iter().map(|(_, v)| v.plain()))?;
            }
            buf.extend(w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?);
        }
        Ok(buf)
    }

    fn text(&self) -> String {
        let mut s = String::new();
        s.push_str(self.command);
        for (k, v) in &self.params.0 {
            s.push_str(&format!(" {k}={}", v.plain()));
        }
        s.push('\n');
        for r in &self.rows {
            let fields: Vec<String> = r.0.iter().map(|(k, v)| format!("{k}={}", v.plain())).collect();
            s.push_str(&fields.join(" "));
            s.push('\n');
        }
        for c in &self.checks {
            let fields: Vec<String> = c.0.iter().map(|(k, v)| format!("{k}={}", v.plain())).collect();
            s.push_str("check ");
            s.push_str(&fields.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, format: Format, out: Option<&std::path::Path>) -> std::io::Result<()> {
        let bytes = self.render(format)?;
        match out {
            Some(p) => std::fs::write(p, bytes),
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(&bytes)?;
                so.flush()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            command: "widths",
            params: Row::new().with("tol", 1e-14),
            rows: vec![Row::new().with("n", 3u64).with("value", 0.125).with("gap", f64::NAN)],
            checks: vec![],
        }
    }

    #[test]
    fn json_floats_are_numbers() {
        let s = String::from_utf8(sample().render(Format::Json).unwrap()).unwrap();
        assert!(s.contains("\"value\": 1.2500000000000000e-1"));
        assert!(s.contains("\"gap\": null"));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert!(v["rows"][0]["value"].is_f64());
    }

    #[test]
    fn csv_uses_newlines() {
        let s = String::from_utf8(sample().render(Format::Csv).unwrap()).unwrap();
        assert_eq!(s, "n,value,gap\n3,1.2500000000000000e-1,\n");
    }
}
