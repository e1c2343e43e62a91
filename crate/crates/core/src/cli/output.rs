//! Output files: a header block (toolkit version, config hash, command),
//! CSV rows with fixed-precision floats and JSON with rounded floats.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::{Result, VERSION};

/// Significant digits after the point for every float written.
pub const FLOAT_DIGITS: usize = 12;

/// Formats a float as `d.dddddddddddde±x`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.FLOAT_DIGITS$e}")
}

/// Rounds a float to [`FLOAT_DIGITS`] digits after the point (scientific).
pub fn round_float(x: f64) -> f64 {
    if x.is_finite() {
        fmt_float(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

/// Rounds every float in a JSON value in place.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = round_float(n.as_f64().expect("f64 number"));
            *value = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Identifies the run that produced a file.
#[derive(Clone, Debug)]
pub struct Header {
    pub command: String,
    pub config_hash: String,
}

impl Header {
    /// The header as `key=value` lines (without the `#` prefix).
    pub fn lines(&self) -> [String; 3] {
        [
            format!("twophase_version={VERSION}"),
            format!("config_sha256={}", self.config_hash),
            format!("command={}", self.command),
        ]
    }
}

/// Writes `body` (an object) merged with the header keys; keys are sorted.
pub fn write_json<T: Serialize>(path: &Path, header: &Header, body: &T) -> Result<()> {
    let mut object = Map::new();
    object.insert("twophase_version".into(), Value::from(VERSION));
    object.insert("config_sha256".into(), Value::from(header.config_hash.clone()));
    object.insert("command".into(), Value::from(header.command.clone()));
    match serde_json::to_value(body)? {
        Value::Object(map) => object.extend(map),
        other => {
            object.insert("data".into(), other);
        }
    }
    let mut value = Value::Object(object);
    round_json(&mut value);
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// A CSV file under construction: `#` header lines, then a column row.
pub struct CsvWriter {
    out: BufWriter<File>,
    columns: usize,
}

impl CsvWriter {
    pub fn create<S: AsRef<str>>(path: &Path, header: &Header, columns: &[S]) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        for line in header.lines() {
            writeln!(out, "# {line}")?;
        }
        let names: Vec<&str> = columns.iter().map(AsRef::as_ref).collect();
        writeln!(out, "{}", names.join(","))?;
        Ok(Self { out, columns: columns.len() })
    }

    /// Writes one row; the cell count must match the column row.
    pub fn row(&mut self, cells: &[Cell]) -> Result<()> {
        assert_eq!(cells.len(), self.columns, "CSV row width");
        let text: Vec<String> = cells.iter().map(Cell::render).collect();
        writeln!(self.out, "{}", text.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// One CSV cell.
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Files written by one command.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
}

impl Artifacts {
    pub fn path(&mut self, dir: &Path, name: &str) -> PathBuf {
        let p = dir.join(name);
        self.files.push(p.clone());
        p
    }
}
