//! Run reports and the tables they carry.

use std::io::Write;

use refjump::RateCertificate;
use serde::ser::{Serialize, Serializer};
use serde::Serialize as DeriveSerialize;
use serde_json::{Map, Value};

use crate::config::{ExperimentConfig, RunKind};
use crate::error::Result;

/// One CSV/JSON cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    /// CSV text; floats carry 17 significant digits so they round-trip.
    pub fn to_csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as u64)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Int(i) => s.serialize_u64(*i),
            Cell::Float(x) => s.serialize_f64(*x),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Empty => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A named pass/fail check: `measured` compared against `threshold` as
/// described by `criterion`.
#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub criterion: String,
}

impl Verdict {
    pub fn at_most(check: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Verdict {
            check: check.into(),
            passed: measured <= threshold,
            measured,
            threshold,
            criterion: "measured <= threshold".into(),
        }
    }

    pub fn at_least(check: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Verdict {
            check: check.into(),
            passed: measured >= threshold,
            measured,
            threshold,
            criterion: "measured >= threshold".into(),
        }
    }

    pub fn greater(check: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Verdict {
            check: check.into(),
            passed: measured > threshold,
            measured,
            threshold,
            criterion: "measured > threshold".into(),
        }
    }

    /// `|measured − target| ≤ tolerance`.
    pub fn near(check: impl Into<String>, measured: f64, target: f64, tolerance: f64) -> Self {
        Verdict {
            check: check.into(),
            passed: (measured - target).abs() <= tolerance,
            measured,
            threshold: tolerance,
            criterion: format!("|measured - {target}| <= threshold"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct NamedCertificate {
    pub name: String,
    pub certificate: RateCertificate,
}

#[derive(Debug, Clone, PartialEq, DeriveSerialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: RunKind,
    pub config: Option<ExperimentConfig>,
    pub defaults_applied: Vec<String>,
    pub certificates: Vec<NamedCertificate>,
    pub estimates: Vec<Estimate>,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn new(kind: RunKind, config: Option<&ExperimentConfig>) -> Self {
        Report {
            tool: "refjump",
            version: env!("CARGO_PKG_VERSION"),
            kind,
            config: config.cloned(),
            defaults_applied: config.map(|c| c.defaults_applied.clone()).unwrap_or_default(),
            certificates: Vec::new(),
            estimates: Vec::new(),
            tables: Vec::new(),
            verdicts: Vec::new(),
            warnings: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn failures(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| !v.passed).collect()
    }

    pub fn certify(&mut self, name: &str, certificate: &RateCertificate) {
        self.certificates.push(NamedCertificate { name: name.into(), certificate: certificate.clone() });
    }

    pub fn estimate(&mut self, name: &str, value: f64, stderr: f64) {
        self.estimates.push(Estimate { name: name.into(), value, stderr });
    }

    pub fn verdicts_table(&self) -> Table {
        let mut t = Table::new("verdicts", &["check", "passed", "measured", "threshold", "criterion"]);
        for v in &self.verdicts {
            t.push(vec![
                Cell::Text(v.check.clone()),
                v.passed.into(),
                v.measured.into(),
                v.threshold.into(),
                Cell::Text(v.criterion.clone()),
            ]);
        }
        t
    }

    /// JSON form. A certificate run also lifts the certificate's fields to
    /// the top level; an infinite MGF bound is written as `"inf"`.
    pub fn to_json(&self) -> Result<Value> {
        let mut value = serde_json::to_value(self)?;
        if let (Value::Object(map), Some(named)) = (&mut value, self.certificates.first()) {
            if let Some(Value::Array(certs)) = map.get_mut("certificates") {
                for (slot, named) in certs.iter_mut().zip(&self.certificates) {
                    patch_infinite(slot.get_mut("certificate"), &named.certificate);
                }
            }
            if self.kind == RunKind::Certificate {
                let mut lifted = serde_json::to_value(&named.certificate)?;
                patch_infinite(Some(&mut lifted), &named.certificate);
                if let Value::Object(fields) = lifted {
                    let mut merged = Map::new();
                    merged.extend(fields);
                    merged.extend(std::mem::take(map));
                    *map = merged;
                }
            }
        }
        Ok(value)
    }

    pub fn write_json<W: Write>(&self, mut sink: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut sink, &self.to_json()?)?;
        writeln!(sink)?;
        Ok(())
    }
}

fn patch_infinite(slot: Option<&mut Value>, cert: &RateCertificate) {
    if let Some(Value::Object(m)) = slot {
        if cert.lambda_max.is_infinite() {
            m.insert("lambda_max".into(), Value::String("inf".into()));
        }
    }
}
