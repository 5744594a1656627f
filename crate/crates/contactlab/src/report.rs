//! Run reports and their on-disk form.
//!
//! `report.json` has sorted keys and every float printed with 17 significant digits,
//! so identical runs give identical bytes. Wall time is kept out of it and goes to
//! `timing.json`.

use serde::Serialize;
use serde_json::{Map, Number, Value};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write to {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// One CSV file: `name.csv` with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub package: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// Grid metadata of the run, if it used one.
    pub grid: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config_echo: Value,
    pub results: Map<String, Value>,
    pub provenance: Provenance,
    pub warnings: Vec<String>,
    /// `"ok"` or `"numerical_failure"`.
    pub status: String,
    pub error: Option<String>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

/// 17 significant digits, or `None` for non-finite values.
pub fn format_float(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.16e}"))
}

/// Rewrites every float in `v` with [`format_float`]; non-finite floats become null.
pub fn normalize_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("float");
            match format_float(x) {
                Some(s) => Value::Number(s.parse::<Number>().expect("formatted float parses")),
                None => Value::Null,
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize_numbers).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize_numbers(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&normalize_numbers(to_value(self))).expect("report serializes");
        s.push('\n');
        s
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => format_float(*x).unwrap_or_else(|| x.to_string()),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

pub fn write_table(table: &Table, dir: &Path) -> Result<(), ReportError> {
    let path = dir.join(format!("{}.csv", table.name));
    let file = std::fs::File::create(&path).map_err(io_err(&path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(cell_text))?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(())
}

/// Writes `report.json` and one CSV per table into `dir`, creating it if needed.
pub fn emit_report(report: &RunReport, dir: &Path) -> Result<(), ReportError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("report.json");
    std::fs::write(&path, report.to_json()).map_err(io_err(&path))?;
    for t in &report.tables {
        write_table(t, dir)?;
    }
    Ok(())
}

pub fn write_timing(dir: &Path, wall_seconds: f64, threads: usize) -> Result<(), ReportError> {
    let path = dir.join("timing.json");
    let v = serde_json::json!({ "wall_seconds": wall_seconds, "threads": threads });
    let mut s = serde_json::to_string_pretty(&v).expect("timing serializes");
    s.push('\n');
    std::fs::write(&path, s).map_err(io_err(&path))
}
