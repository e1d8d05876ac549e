//! Tabular results with a metadata header, written as CSV or JSON.
//!
//! CSV layout: `# key = value` comment lines, then a header row, then data.
//! Undefined values are `NA` in CSV and `null` in JSON. Floats use Rust's
//! shortest round-trip formatting, so reading a file back reproduces the
//! in-memory table exactly.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::error::{invalid, CliError, Result};

pub const MISSING: &str = "NA";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Missing,
}

impl Cell {
    /// Non-finite numbers become `Missing`.
    pub fn num(v: f64) -> Self {
        if v.is_finite() {
            Self::Num(v)
        } else {
            Self::Missing
        }
    }

    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Self::Missing, Self::num)
    }

    pub fn text(s: impl Into<String>) -> Self {
        Self::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Self::Num(v) => Some(*v),
            _ => None,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Self::Num(v) => format!("{v:?}"),
            Self::Text(s) => s.clone(),
            Self::Missing => MISSING.to_string(),
        }
    }

    fn from_csv(s: &str) -> Self {
        if s == MISSING {
            Self::Missing
        } else if let Ok(v) = s.parse::<f64>() {
            Self::Num(v)
        } else {
            Self::Text(s.to_string())
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Self::Num(v) => json!(v),
            Self::Text(s) => json!(s),
            Self::Missing => Value::Null,
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Null => Ok(Self::Missing),
            Value::Number(n) => n.as_f64().map(Self::Num).ok_or_else(|| invalid("non-f64 number")),
            Value::String(s) => Ok(Self::Text(s.clone())),
            other => Err(invalid(format!("unexpected JSON cell {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// Ordered `(key, value)` pairs; values are free text without newlines.
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { metadata: Vec::new(), columns: columns.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k} = {v}").expect("write to Vec");
        }
        let mut w = csv::Writer::from_writer(out);
        let io_err = |e: csv::Error| invalid(format!("csv encoding failed: {e}"));
        w.write_record(&self.columns).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv)).map_err(io_err)?;
        }
        w.into_inner().map_err(|e| invalid(format!("csv flush failed: {e}")))
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| invalid(format!("not UTF-8: {e}")))?;
        let mut metadata = Vec::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix("# ") else { break };
            let rest = rest.trim_end_matches('\n');
            let (k, v) = rest.split_once(" = ").ok_or_else(|| invalid(format!("bad metadata line {rest:?}")))?;
            metadata.push((k.to_string(), v.to_string()));
            body_start += line.len();
        }
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(&bytes[body_start..]);
        let columns = r
            .headers()
            .map_err(|e| invalid(format!("bad csv header: {e}")))?
            .iter()
            .map(String::from)
            .collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| invalid(format!("bad csv row: {e}")))?;
            rows.push(rec.iter().map(Cell::from_csv).collect());
        }
        Ok(Self { metadata, columns, rows })
    }

    pub fn to_json(&self) -> Vec<u8> {
        let metadata: Vec<Value> = self.metadata.iter().map(|(k, v)| json!([k, v])).collect();
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::to_json).collect())).collect();
        let mut obj = Map::new();
        obj.insert("metadata".into(), Value::Array(metadata));
        obj.insert("columns".into(), json!(self.columns));
        obj.insert("rows".into(), Value::Array(rows));
        let mut bytes = serde_json::to_vec_pretty(&Value::Object(obj)).expect("JSON value serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let v: Value = serde_json::from_slice(bytes).map_err(|e| invalid(format!("bad JSON: {e}")))?;
        let field = |name: &str| v.get(name).and_then(Value::as_array).ok_or_else(|| invalid(format!("missing {name}")));
        let metadata = field("metadata")?
            .iter()
            .map(|pair| match pair.as_array().map(Vec::as_slice) {
                Some([Value::String(k), Value::String(v)]) => Ok((k.clone(), v.clone())),
                _ => Err(invalid("metadata entries must be [key, value] strings")),
            })
            .collect::<Result<_>>()?;
        let columns = field("columns")?
            .iter()
            .map(|c| c.as_str().map(String::from).ok_or_else(|| invalid("column names must be strings")))
            .collect::<Result<_>>()?;
        let rows = field("rows")?
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| invalid("rows must be arrays"))?
                    .iter()
                    .map(Cell::from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self { metadata, columns, rows })
    }

    pub fn encode(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json()),
        }
    }

    pub fn decode(bytes: &[u8], format: Format) -> Result<Self> {
        match format {
            Format::Csv => Self::from_csv(bytes),
            Format::Json => Self::from_json(bytes),
        }
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn write(&self, path: Option<&Path>, format: Format) -> Result<()> {
        let bytes = self.encode(format)?;
        match path {
            Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
            None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::io("<stdout>", e)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["name", "x", "y"]);
        t.meta("command", "\"mean-psf\"");
        t.meta("note", "densities sum to 1, \"quoted\"");
        t.push(vec![Cell::text("a, b"), Cell::num(0.1 + 0.2), Cell::Missing]);
        t.push(vec![Cell::text("c"), Cell::num(-1e-300), Cell::num(std::f64::consts::PI)]);
        t.push(vec![Cell::text("d"), Cell::num(f64::NAN), Cell::num(3.0)]);
        t
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = sample();
        let bytes = t.to_csv().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("# command = \"mean-psf\"\n"));
        assert!(text.contains(",NA\n"));
        assert_eq!(Table::from_csv(&bytes).unwrap(), t);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let t = sample();
        let bytes = t.to_json();
        assert!(String::from_utf8(bytes.clone()).unwrap().contains("null"));
        assert_eq!(Table::from_json(&bytes).unwrap(), t);
    }

    #[test]
    fn non_finite_numbers_are_missing() {
        assert_eq!(Cell::num(f64::INFINITY), Cell::Missing);
        assert_eq!(Cell::opt(None), Cell::Missing);
    }

    #[test]
    fn write_reports_path_on_failure() {
        let err = sample().write(Some(Path::new("/nonexistent-dir/x.csv")), Format::Csv).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
