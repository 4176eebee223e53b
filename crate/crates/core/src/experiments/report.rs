//! Experiment reports: a CSV table of per-grid-point records, a parameter
//! table and a one-line verdict.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// 12 significant digits.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) => f.write_str(&fmt_float(*x)),
            Cell::Text(s) => f.write_str(&csv_escape(s)),
            Cell::Bool(b) => write!(f, "{b}"),
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub id: String,
    pub params: Vec<(String, String)>,
    pub tolerances: Vec<(String, f64)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub verdict: Verdict,
    pub summary: String,
    pub notes: Vec<String>,
    /// Named auxiliary files such as witnesses, written next to the CSV.
    pub artifacts: Vec<(String, String)>,
}

impl ExperimentReport {
    pub fn new(id: &str, columns: &[&str]) -> Self {
        ExperimentReport {
            id: id.to_string(),
            params: Vec::new(),
            tolerances: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            verdict: Verdict::Inconclusive,
            summary: String::new(),
            notes: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl fmt::Display) {
        self.params.push((key.to_string(), value.to_string()));
    }

    pub fn tolerance(&mut self, key: &str, value: f64) {
        self.tolerances.push((key.to_string(), value));
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn attach(&mut self, name: &str, content: String) {
        self.artifacts.push((name.to_string(), content));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn conclude(&mut self, verdict: Verdict, summary: impl Into<String>) {
        self.verdict = verdict;
        self.summary = summary.into();
    }

    /// Numeric values of a column (integers widened, other cells skipped).
    pub fn column(&self, name: &str) -> Vec<f64> {
        let Some(j) = self.columns.iter().position(|c| c == name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| match &r[j] {
                Cell::Float(x) => Some(*x),
                Cell::Int(i) => Some(*i as f64),
                _ => None,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(|c| c.to_string()).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    /// `key,value` rows: parameters, tolerances and notes.
    pub fn params_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        let _ = writeln!(s, "experiment,{}", csv_escape(&self.id));
        for (k, v) in &self.params {
            let _ = writeln!(s, "{},{}", csv_escape(k), csv_escape(v));
        }
        for (k, v) in &self.tolerances {
            let _ = writeln!(s, "tolerance.{},{}", csv_escape(k), fmt_float(*v));
        }
        for (i, n) in self.notes.iter().enumerate() {
            let _ = writeln!(s, "note.{i},{}", csv_escape(n));
        }
        s
    }

    pub fn verdict_line(&self) -> String {
        let summary = self.summary.replace('\n', " ");
        if summary.is_empty() {
            format!("{} {}\n", self.id, self.verdict)
        } else {
            format!("{} {} {}\n", self.id, self.verdict, summary)
        }
    }

    /// Writes `<id>.csv`, `<id>.params.csv`, `<id>.verdict` and one
    /// `<id>.<name>.txt` per artifact into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut files = vec![
            (format!("{}.csv", self.id), self.to_csv()),
            (format!("{}.params.csv", self.id), self.params_csv()),
            (format!("{}.verdict", self.id), self.verdict_line()),
        ];
        for (name, body) in &self.artifacts {
            files.push((format!("{}.{name}.txt", self.id), body.clone()));
        }
        let mut out = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            out.push(path);
        }
        Ok(out)
    }
}
