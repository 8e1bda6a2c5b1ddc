//! Output plumbing: units, deterministic CSV/JSON rendering, and the run
//! manifest written next to every data file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use optloss::Information;
use serde::Serialize;

/// Unit for information columns. Values are stored in nats internally;
/// the flag changes only how they are rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Nats,
    Bits,
}

impl Unit {
    pub fn suffix(self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }

    pub fn convert(self, info: Information) -> f64 {
        match self {
            Unit::Nats => info.nats(),
            Unit::Bits => info.bits(),
        }
    }
}

/// Full double precision: 17 significant digits, stable across runs.
pub fn fmt_full(x: f64) -> String {
    format!("{x:.16e}")
}

/// One cell of a data table; numbers stay numbers in the JSON mirror.
#[derive(Debug, Clone)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(u64),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// A rectangular data table with a single-line header, rendered as CSV or
/// as a JSON array of objects.
#[derive(Debug, Clone, Default)]
pub struct DataTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl DataTable {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(columns: I) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                match cell {
                    Cell::Text(s) => out.push_str(s),
                    Cell::Num(x) => {
                        let _ = write!(out, "{}", fmt_full(*x));
                    }
                    Cell::Int(k) => {
                        let _ = write!(out, "{k}");
                    }
                    Cell::Bool(b) => {
                        let _ = write!(out, "{b}");
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    let value = match cell {
                        Cell::Text(s) => serde_json::Value::String(s.clone()),
                        Cell::Num(x) => serde_json::json!(x),
                        Cell::Int(k) => serde_json::json!(k),
                        Cell::Bool(b) => serde_json::Value::Bool(*b),
                    };
                    obj.insert(name.clone(), value);
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }

    pub fn render(&self, format: DataFormat) -> String {
        match format {
            DataFormat::Csv => self.to_csv(),
            DataFormat::Json => {
                let mut s =
                    serde_json::to_string_pretty(&self.to_json()).expect("table is valid JSON");
                s.push('\n');
                s
            }
        }
    }
}

/// Serialization format for data-emitting subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DataFormat {
    Csv,
    Json,
}

/// Record of one invocation, written as `<out>.manifest.json` beside
/// every emitted data file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub version: String,
    pub duration_ms: f64,
    pub outputs: Vec<String>,
}

/// Writes `content` to `out` (or stdout when `out` is `None`); when a
/// file is written, a manifest referencing it follows.
pub struct Emitter {
    subcommand: &'static str,
    parameters: serde_json::Value,
    started: Instant,
    written: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(subcommand: &'static str, parameters: serde_json::Value) -> Self {
        Self {
            subcommand,
            parameters,
            started: Instant::now(),
            written: Vec::new(),
        }
    }

    pub fn emit(&mut self, out: Option<&Path>, content: &str) -> Result<()> {
        match out {
            Some(path) => {
                std::fs::write(path, content)
                    .with_context(|| format!("writing {}", path.display()))?;
                self.written.push(path.to_path_buf());
            }
            None => print!("{content}"),
        }
        Ok(())
    }

    /// Writes the manifest if any data file was emitted.
    pub fn finish(self) -> Result<()> {
        if self.written.is_empty() {
            return Ok(());
        }
        let manifest = RunManifest {
            subcommand: self.subcommand.to_string(),
            parameters: self.parameters,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_ms: self.started.elapsed().as_secs_f64() * 1e3,
            outputs: self
                .written
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
        };
        let first = &self.written[0];
        let path = manifest_path(first);
        let body = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

pub fn manifest_path(data_path: &Path) -> PathBuf {
    let mut name = data_path.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Key-value report for the single-point commands; text by default, with
/// CSV and JSON mirrors.
#[derive(Debug, Default)]
pub struct Report {
    entries: Vec<(String, Cell, Option<&'static str>)>,
}

impl Report {
    pub fn push(&mut self, key: &str, value: Cell) {
        self.entries.push((key.to_string(), value, None));
    }

    pub fn push_annotated(&mut self, key: &str, value: Cell, note: &'static str) {
        self.entries.push((key.to_string(), value, Some(note)));
    }

    pub fn to_text(&self) -> String {
        let width = self
            .entries
            .iter()
            .map(|(k, _, _)| k.len())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for (key, cell, note) in &self.entries {
            let value = match cell {
                Cell::Text(s) => s.clone(),
                Cell::Num(x) => format!("{x}"),
                Cell::Int(k) => format!("{k}"),
                Cell::Bool(b) => format!("{b}"),
            };
            let _ = write!(out, "{key:<width$}  {value}");
            if let Some(note) = note {
                let _ = write!(out, "  {note}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        for (key, cell, _) in &self.entries {
            let value = match cell {
                Cell::Text(s) => s.clone(),
                Cell::Num(x) => fmt_full(*x),
                Cell::Int(k) => format!("{k}"),
                Cell::Bool(b) => format!("{b}"),
            };
            let _ = writeln!(out, "{key},{value}");
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        for (key, cell, _) in &self.entries {
            let value = match cell {
                Cell::Text(s) => serde_json::Value::String(s.clone()),
                Cell::Num(x) => serde_json::json!(x),
                Cell::Int(k) => serde_json::json!(k),
                Cell::Bool(b) => serde_json::Value::Bool(*b),
            };
            obj.insert(key.clone(), value);
        }
        serde_json::Value::Object(obj)
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.to_text(),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => {
                let mut s =
                    serde_json::to_string_pretty(&self.to_json()).expect("report is valid JSON");
                s.push('\n');
                s
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}
