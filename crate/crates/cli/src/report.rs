//! Experiment reports, CSV tables and the JSON summary.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Above(f64),
    Between(f64, f64),
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(b) => v <= b,
            Bound::AtLeast(b) => v >= b,
            Bound::Above(b) => v > b,
            Bound::Between(lo, hi) => v >= lo && v <= hi,
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Bound::AtMost(b) => write!(f, "<= {b:.3e}"),
            Bound::AtLeast(b) => write!(f, ">= {b:.3e}"),
            Bound::Above(b) => write!(f, "> {b:.3e}"),
            Bound::Between(lo, hi) => write!(f, "in [{lo:.4}, {hi:.4}]"),
        }
    }
}

/// One measured quantity checked against its tolerance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitSummary {
    pub name: String,
    pub slope: f64,
    pub half_width: f64,
    pub r2: f64,
    pub target: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Reference {
    /// Group value the slope belongs to, or every group when absent.
    pub group: Option<String>,
    pub slope: f64,
}

/// How `plot` draws a check's CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    pub group: Option<String>,
    /// Keep only rows whose column equals the value.
    pub only: Option<(String, String)>,
    pub references: Vec<Reference>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
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

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV with a header row and 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Num(x) => format!("{x:.16e}"),
                Cell::Text(s) => s.clone(),
                Cell::Empty => String::new(),
            }))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub check: String,
    pub criterion: u8,
    /// Estimate being checked.
    pub anchor: String,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    pub measured: BTreeMap<String, f64>,
    pub fits: Vec<FitSummary>,
    pub assertions: Vec<Assertion>,
    pub pass: bool,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_s: Option<f64>,
    pub plot: Option<PlotSpec>,
    #[serde(skip)]
    pub table: Table,
}

impl ExperimentReport {
    pub fn new(check: &str, criterion: u8, anchor: &str, seed: u64) -> Self {
        ExperimentReport {
            check: check.to_string(),
            criterion,
            anchor: anchor.to_string(),
            params: BTreeMap::new(),
            seed,
            measured: BTreeMap::new(),
            fits: Vec::new(),
            assertions: Vec::new(),
            pass: true,
            error: None,
            wall_time_s: None,
            plot: None,
            table: Table::default(),
        }
    }

    pub fn param(&mut self, k: &str, v: f64) {
        self.params.insert(k.to_string(), v);
    }

    pub fn measure(&mut self, k: &str, v: f64) {
        self.measured.insert(k.to_string(), v);
    }

    pub fn check(&mut self, name: &str, value: f64, bound: Bound) {
        let pass = value.is_finite() && bound.holds(value);
        self.pass &= pass;
        self.assertions.push(Assertion { name: name.to_string(), value, bound, pass });
    }

    pub fn fit(&mut self, name: &str, fit: &conifold::analysis::DecayFit, target: Option<f64>) {
        self.fits.push(FitSummary { name: name.to_string(), slope: fit.slope, half_width: fit.half_width, r2: fit.r2, target });
    }

    pub fn fail(&mut self, msg: String) {
        self.pass = false;
        self.error = Some(msg);
    }

    /// One line per report for the terminal.
    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let mut parts: Vec<String> = self.assertions.iter().map(|a| format!("{}={:.4e} {}", a.name, a.value, a.bound)).collect();
        if let Some(e) = &self.error {
            parts.push(format!("error: {e}"));
        }
        format!("{status} {:<15} {}", self.check, parts.join("; "))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub seed: u64,
    pub config: BTreeMap<String, f64>,
    pub pass: bool,
    pub reports: Vec<ExperimentReport>,
}

impl Summary {
    pub fn new(seed: u64, config: BTreeMap<String, f64>, mut reports: Vec<ExperimentReport>) -> Self {
        reports.sort_by(|a, b| a.check.cmp(&b.check));
        let pass = reports.iter().all(|r| r.pass);
        Summary { schema: SCHEMA, seed, config, pass, reports }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for r in &self.reports {
            r.table.write_csv(&dir.join(format!("{}.csv", r.check)))?;
        }
        let path = dir.join("summary.json");
        let mut f = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Summary> {
        let path = dir.join("summary.json");
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert!(Bound::AtMost(1.0).holds(1.0));
        assert!(!Bound::Above(0.0).holds(0.0));
        assert!(Bound::Between(-3.3, -2.7).holds(-3.0));
    }

    #[test]
    fn nan_never_passes() {
        let mut r = ExperimentReport::new("x", 1, "", 0);
        r.check("v", f64::NAN, Bound::AtMost(1.0));
        assert!(!r.pass);
    }

    #[test]
    fn csv_uses_seventeen_digits() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![0.1.into(), Cell::Empty]);
        let p = dir.path().join("x.csv");
        t.write_csv(&p).unwrap();
        let s = std::fs::read_to_string(p).unwrap();
        assert_eq!(s, "a,b\n1.0000000000000001e-1,\n");
    }
}
