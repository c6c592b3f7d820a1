//! Tabular output records in CSV and JSON.
//!
//! Floats are written in scientific notation with 17 significant digits, so
//! every finite `f64` survives a text round trip exactly. Non-finite values
//! are written as `NaN`, `inf` and `-inf` in CSV and `null` in JSON.

use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(i) => Some(i as f64),
            Cell::Float(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::domain(format!("unknown format '{other}' (csv or json)"))),
        }
    }
}

/// A named-column table with a schema tag.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub schema_version: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn parse_cell(s: &str) -> Cell {
    if s.is_empty() {
        return Cell::Missing;
    }
    let b = s.as_bytes();
    let int_like = b.iter().enumerate().all(|(i, c)| c.is_ascii_digit() || (i == 0 && *c == b'-'))
        && b.iter().any(u8::is_ascii_digit);
    if int_like {
        if let Ok(i) = s.parse::<i64>() {
            if i.to_string() == s {
                return Cell::Int(i);
            }
        }
    }
    if let Ok(v) = s.parse::<f64>() {
        // Only the canonical spelling is a float; anything else stays text
        // so that re-emission reproduces the input byte for byte.
        if format_float(v) == s {
            return Cell::Float(v);
        }
    }
    Cell::Text(s.to_string())
}

impl OutputRecord {
    pub fn new(schema_version: impl Into<String>, columns: Vec<String>) -> Self {
        OutputRecord {
            schema_version: schema_version.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::domain(format!(
                "row has {} cells, expected {}",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Float(v) => format_float(*v),
                Cell::Text(s) => s.clone(),
                Cell::Missing => String::new(),
            }))
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|c| match c {
                            Cell::Int(i) => Value::from(*i),
                            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
                            Cell::Text(s) => Value::String(s.clone()),
                            Cell::Missing => Value::Null,
                        })
                        .collect(),
                )
            })
            .collect();
        let mut obj = Map::new();
        obj.insert("schema_version".into(), Value::String(self.schema_version.clone()));
        obj.insert("columns".into(), Value::from(self.columns.clone()));
        obj.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// Parses CSV produced by [`OutputRecord::to_csv`]. CSV carries no schema tag,
/// so the caller supplies it.
pub fn parse_csv(text: &str, schema_version: &str) -> Result<OutputRecord> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let perr = |e: csv::Error| {
        let position = e.position().map_or(0, |p| p.byte() as usize);
        Error::Parse {
            position,
            message: e.to_string(),
        }
    };
    let columns: Vec<String> = rdr.headers().map_err(perr)?.iter().map(str::to_string).collect();
    let mut rec = OutputRecord::new(schema_version, columns);
    for row in rdr.records() {
        let row = row.map_err(perr)?;
        rec.rows.push(row.iter().map(parse_cell).collect());
    }
    Ok(rec)
}

/// Parses JSON produced by [`OutputRecord::to_json`].
pub fn parse_json(text: &str) -> Result<OutputRecord> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        position: e.column(),
        message: e.to_string(),
    })?;
    let bad = |m: &str| Error::Parse {
        position: 0,
        message: m.to_string(),
    };
    let obj = v.as_object().ok_or_else(|| bad("expected a JSON object"))?;
    let schema = obj
        .get("schema_version")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("missing string field schema_version"))?;
    let columns: Vec<String> = obj
        .get("columns")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing array field columns"))?
        .iter()
        .map(|c| c.as_str().map(str::to_string).ok_or_else(|| bad("column names must be strings")))
        .collect::<Result<_>>()?;
    let mut rec = OutputRecord::new(schema, columns);
    for row in obj
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing array field rows"))?
    {
        let cells = row.as_array().ok_or_else(|| bad("rows must be arrays"))?;
        let cells = cells
            .iter()
            .map(|c| match c {
                Value::Null => Ok(Cell::Missing),
                Value::String(s) => Ok(Cell::Text(s.clone())),
                Value::Number(n) => Ok(match n.as_i64() {
                    Some(i) if !n.is_f64() => Cell::Int(i),
                    _ => Cell::Float(n.as_f64().unwrap_or(f64::NAN)),
                }),
                _ => Err(bad("cells must be numbers, strings or null")),
            })
            .collect::<Result<Vec<_>>>()?;
        rec.push(cells).map_err(|e| bad(&e.to_string()))?;
    }
    Ok(rec)
}
