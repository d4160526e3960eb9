//! Verification reports and their JSON / CSV serialisation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::scenario::OutputFormat;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        })
    }
}

/// One executed check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub status: Status,
    /// `None` when the check could not be evaluated or was not finite.
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub metadata: BTreeMap<String, Value>,
}

impl Record {
    /// Passes when `measured` is finite and within `tolerance`.
    pub fn compare(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        let ok = measured.is_finite() && measured <= tolerance;
        Self {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured: measured.is_finite().then_some(measured),
            tolerance,
            metadata: BTreeMap::new(),
        }
    }

    pub fn failed(name: impl Into<String>, tolerance: f64, error: impl ToString) -> Self {
        let mut r = Self {
            name: name.into(),
            status: Status::Fail,
            measured: None,
            tolerance,
            metadata: BTreeMap::new(),
        };
        r.metadata.insert("error".into(), Value::String(error.to_string()));
        r
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reproducibility {
    pub scenario_hash: String,
    pub version: String,
    pub seed: u64,
}

/// A named table written next to the report as CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: String,
    pub suite: String,
    pub records: Vec<Record>,
    pub reproducibility: Reproducibility,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip)]
    pub tables: Vec<Table>,
    pub timestamp: String,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(Record::passed)
    }

    /// The report without its timestamp, for reproducibility comparisons.
    pub fn body_json(&self) -> serde_json::Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Value::Object(map) = &mut v {
            map.remove("timestamp");
        }
        serde_json::to_string_pretty(&v)
    }

    /// Writes `report.json` and/or `records.csv` plus one CSV per table.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        if matches!(format, OutputFormat::Json | OutputFormat::Both) {
            let path = dir.join("report.json");
            let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
            std::fs::write(&path, text + "\n")?;
            written.push(path);
        }
        if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
            let path = dir.join("records.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["name", "status", "measured", "tolerance"])?;
            for r in &self.records {
                let status = match r.status {
                    Status::Pass => "pass",
                    Status::Fail => "fail",
                };
                let measured = r.measured.map(|m| format!("{m:e}")).unwrap_or_default();
                w.write_record([r.name.as_str(), status, &measured, &format!("{:e}", r.tolerance)])?;
            }
            w.flush()?;
            written.push(path);
            for t in &self.tables {
                let path = dir.join(format!("{}.csv", t.name));
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(&t.columns)?;
                for row in &t.rows {
                    w.write_record(row.iter().map(|v| format!("{v:e}")))?;
                }
                w.flush()?;
                written.push(path);
            }
        }
        Ok(written)
    }
}
