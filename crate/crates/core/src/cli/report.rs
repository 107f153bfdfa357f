//! Run reports: CSV tables plus one plain-text summary per run.
//!
//! CSV files never contain timestamps, so reruns of the same config and seed
//! are byte-identical. Wall-clock data lives on the first line of the text
//! report only.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};

/// Longer tables are elided in the text report; the CSV keeps every row.
const TEXT_ROWS: usize = 40;

/// Scientific notation with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt_num(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<u32> for Cell {
    fn from(i: u32) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
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

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem of the CSV.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub entries: Vec<(String, Cell)>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
    /// `Some` for commands with a verdict.
    pub passed: Option<bool>,
    pub started: SystemTime,
    pub elapsed: Duration,
}

impl Report {
    pub fn new(command: &str, config_hash: &str) -> Self {
        Self {
            command: command.to_string(),
            config_hash: config_hash.to_string(),
            seed: None,
            entries: Vec::new(),
            tables: Vec::new(),
            notes: Vec::new(),
            passed: None,
            started: SystemTime::now(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn entry(&mut self, label: &str, value: impl Into<Cell>) {
        self.entries.push((label.to_string(), value.into()));
    }

    pub fn value(&self, label: &str) -> Option<&Cell> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, v)| v)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn finish(&mut self) {
        self.elapsed = self.started.elapsed().unwrap_or_default();
    }

    pub fn to_text(&self) -> String {
        let t0 = self.started.duration_since(UNIX_EPOCH).unwrap_or_default();
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# {} started {}.{:03} (unix), wall {:.3} s",
            self.command,
            t0.as_secs(),
            t0.subsec_millis(),
            self.elapsed.as_secs_f64()
        );
        let _ = writeln!(s, "command: {}", self.command);
        let _ = writeln!(s, "config_sha256: {}", self.config_hash);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed: {seed}");
        }
        for (label, v) in &self.entries {
            let _ = writeln!(s, "{label}: {}", v.render());
        }
        for t in &self.tables {
            let _ = writeln!(s, "\n[{}] {} rows -> {}.csv", t.name, t.rows.len(), t.name);
            let _ = writeln!(s, "{}", t.header.join(", "));
            for row in t.rows.iter().take(TEXT_ROWS) {
                let _ = writeln!(s, "{}", row.iter().map(Cell::render).collect::<Vec<_>>().join(", "));
            }
            if t.rows.len() > TEXT_ROWS {
                let _ = writeln!(s, "... {} more rows in {}.csv", t.rows.len() - TEXT_ROWS, t.name);
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        if let Some(p) = self.passed {
            let _ = writeln!(s, "result: {}", if p { "PASS" } else { "FAIL" });
        }
        s
    }

    /// Writes every table as `<name>.csv` and the summary as `<command>_report.txt`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        for t in &self.tables {
            let p = dir.join(format!("{}.csv", t.name));
            std::fs::write(&p, t.to_csv()?)?;
            out.push(p);
        }
        let p = dir.join(format!("{}_report.txt", self.command.replace('-', "_")));
        std::fs::write(&p, self.to_text())?;
        out.push(p);
        Ok(out)
    }
}
