//! Report records, named series and CSV export.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::SuiteConfig;
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    /// The mathematical statement the check exercises, or "plumbing".
    pub anchor: String,
    pub status: Status,
    /// Absent when the check could not produce a finite number.
    pub measured: Option<f64>,
    pub bound: Option<f64>,
    pub tolerance: Option<f64>,
    /// Extra context: counts, fitted constants, error messages.
    pub note: Option<String>,
    pub runtime_ms: u64,
}

/// Tabular data behind a check, exported with `specinv csv`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Series { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub seed: u64,
    pub config: SuiteConfig,
    pub records: Vec<Record>,
    pub series: BTreeMap<String, Series>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.status == Status::Fail).count()
    }

    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }

    /// The report with every runtime zeroed: the part covered by the
    /// determinism contract.
    pub fn body(&self) -> String {
        let mut copy = self.clone();
        for r in &mut copy.records {
            r.runtime_ms = 0;
        }
        copy.to_json()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bad = |reason: String| CliError::BadReport { path: path.display().to_string(), reason };
        let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))
    }

    /// Writes one series as CSV: header row, then full-precision rows.
    pub fn write_csv(&self, series: &str, out: &Path) -> Result<(), CliError> {
        let data = self.series.get(series).ok_or_else(|| CliError::UnknownSeries {
            name: series.to_string(),
            available: self.series.keys().cloned().collect::<Vec<_>>().join(", "),
        })?;
        let io = |source: std::io::Error| CliError::Io { path: out.display().to_string(), source };
        let mut writer = csv::Writer::from_path(out).map_err(|e| io(e.into()))?;
        writer.write_record(&data.columns).map_err(|e| io(e.into()))?;
        for row in &data.rows {
            // `{}` on f64 prints the shortest string that round-trips.
            writer.write_record(row.iter().map(|v| format!("{v}"))).map_err(|e| io(e.into()))?;
        }
        writer.flush().map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut series = BTreeMap::new();
        let mut s = Series::new(&["n", "norm_root"]);
        s.push(vec![1.0, 0.1 + 0.2]);
        s.push(vec![2.0, 1.0 / 3.0]);
        series.insert("radius".to_string(), s);
        Report {
            version: "0".into(),
            seed: 1,
            config: SuiteConfig::default(),
            records: vec![Record {
                name: "a".into(),
                anchor: "plumbing".into(),
                status: Status::Pass,
                measured: Some(0.0),
                bound: None,
                tolerance: Some(1e-3),
                note: None,
                runtime_ms: 17,
            }],
            series,
        }
    }

    #[test]
    fn csv_has_header_and_full_precision() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.csv");
        sample().write_csv("radius", &out).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text, "n,norm_root\n1,0.30000000000000004\n2,0.3333333333333333\n");
        assert!(matches!(sample().write_csv("missing", &out), Err(CliError::UnknownSeries { .. })));
    }

    #[test]
    fn body_ignores_runtime() {
        let a = sample();
        let mut b = sample();
        b.records[0].runtime_ms = 99;
        assert_ne!(a.to_json(), b.to_json());
        assert_eq!(a.body(), b.body());
    }

    #[test]
    fn reports_round_trip() {
        let a = sample();
        let back: Report = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back, a);
    }
}
