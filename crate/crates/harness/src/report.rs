//! Experiment reports: a CSV table plus a plain-text summary with pass/fail
//! lines.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;

/// One CSV cell. Numbers are written with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

fn format_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format_num(*v),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    /// e.g. `max_residual < 1e-10`
    pub name: String,
    pub measured: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub kind: &'static str,
    pub seed: u64,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Informational summary lines (fits, timings of sub-stages, settings).
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(kind: &'static str, seed: u64, header: &[&'static str]) -> Self {
        Report {
            kind,
            seed,
            header: header.to_vec(),
            rows: Vec::new(),
            notes: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn check(&mut self, name: impl Into<String>, measured: impl Into<String>, pass: bool) {
        self.checks.push(Check {
            name: name.into(),
            measured: measured.into(),
            pass,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(format_cell).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary(&self, config: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {}", self.kind);
        let _ = writeln!(s, "seed: {}", self.seed);
        if !config.is_empty() {
            let _ = writeln!(s, "config:");
            for l in config.lines() {
                let _ = writeln!(s, "  {l}");
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "{n}");
        }
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{}: {} (measured {})", c.name, verdict, c.measured);
        }
        let _ = writeln!(s, "overall: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }

    /// Write `<kind>.csv` and `<kind>_summary.txt` into `dir`.
    pub fn write(&self, dir: &Path, config: &str) -> anyhow::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let csv = dir.join(format!("{}.csv", self.kind));
        let summary = dir.join(format!("{}_summary.txt", self.kind));
        std::fs::write(&csv, self.csv()).with_context(|| format!("writing {}", csv.display()))?;
        std::fs::write(&summary, self.summary(config))
            .with_context(|| format!("writing {}", summary.display()))?;
        Ok((csv, summary))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format() {
        let mut r = Report::new("demo", 42, &["case_id", "residual"]);
        r.row(vec!["a,b".into(), 0.1.into()]);
        r.row(vec!["c".into(), (-2.0).into()]);
        assert_eq!(
            r.csv(),
            "case_id,residual\n\"a,b\",1.0000000000000001e-1\nc,-2.0000000000000000e0\n"
        );
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -1e-300, f64::MIN_POSITIVE] {
            assert_eq!(format_num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn summary_lines() {
        let mut r = Report::new("chen", 42, &["case_id", "residual"]);
        r.check("max_residual < 1e-10", "1.0e-14", true);
        let s = r.summary("");
        assert!(s.contains("max_residual < 1e-10: PASS"));
        assert!(s.contains("seed: 42"));
        r.check("other", "2", false);
        assert!(!r.passed());
        assert!(r.summary("").ends_with("overall: FAIL\n"));
    }
}
