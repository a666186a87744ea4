//! Certification reports and their JSON/CSV encodings.
//!
//! JSON schema (all logarithms base 2):
//!
//! ```text
//! {
//!   "tool": "qcbnorm", "version": str, "log_base": 2, "command": "compute"|"verify",
//!   "seed": int, "restarts": int, "alphas": [float],
//!   "generated_at_unix": int,            // absent with --no-timing
//!   "records": [{
//!     "key": str, "check": str, "channels": [str], "alpha": float|null,
//!     "values": {str: float|null}, "gap": float|null, "tolerance": float|null,
//!     "pass": bool, "diagnostics": {str: float|bool|int}, "states": {str: [[[re, im]]]},
//!     "error": str|null,
//!     "wall_time_s": float               // absent with --no-timing
//!   }],
//!   "summary": {"total": int, "passed": int, "failed": int}
//! }
//! ```
//!
//! Records are sorted by `key`. A record passes iff it has no error and, when
//! a tolerance is set, `|gap| ≤ tolerance`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const TOOL: &str = "qcbnorm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Diagnostic {
    Flag(bool),
    Count(u64),
    Real(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub key: String,
    pub check: String,
    pub channels: Vec<String>,
    pub alpha: Option<f64>,
    pub values: BTreeMap<String, f64>,
    pub gap: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub diagnostics: BTreeMap<String, Diagnostic>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub states: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Record {
    pub fn new(check: &str, channels: Vec<String>, alpha: Option<f64>) -> Self {
        let alpha_part = alpha.map(|a| format!("{a}")).unwrap_or_else(|| "-".into());
        let key = format!("{check}/{}/{alpha_part}", channels.join("*"));
        Self {
            key,
            check: check.into(),
            channels,
            alpha,
            values: BTreeMap::new(),
            gap: None,
            tolerance: None,
            pass: false,
            diagnostics: BTreeMap::new(),
            states: BTreeMap::new(),
            error: None,
            wall_time_s: None,
        }
    }

    pub fn value(mut self, name: &str, v: f64) -> Self {
        self.values.insert(name.into(), v);
        self
    }

    pub fn diag(mut self, name: &str, d: Diagnostic) -> Self {
        self.diagnostics.insert(name.into(), d);
        self
    }

    /// Sets the gap and tolerance and decides `pass`.
    pub fn judged(mut self, gap: f64, tolerance: f64) -> Self {
        self.gap = Some(gap);
        self.tolerance = Some(tolerance);
        self.pass = self.error.is_none() && gap.is_finite() && gap.abs() <= tolerance;
        self
    }

    /// Marks a record without a tolerance as passing.
    pub fn informational(mut self) -> Self {
        self.pass = self.error.is_none();
        self
    }

    pub fn failed(mut self, error: impl Into<String>) -> Self {
        self.error = Some(error.into());
        self.pass = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub tool: String,
    pub version: String,
    pub log_base: u32,
    pub command: String,
    pub seed: u64,
    pub restarts: usize,
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl CertificationReport {
    pub fn new(command: &str, seed: u64, restarts: usize, alphas: Vec<f64>, mut records: Vec<Record>, timing: bool) -> Self {
        records.sort_by(|a, b| a.key.cmp(&b.key));
        let passed = records.iter().filter(|r| r.pass).count();
        let generated_at_unix = timing.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            log_base: 2,
            command: command.into(),
            seed,
            restarts,
            alphas,
            generated_at_unix,
            summary: Summary { total: records.len(), passed, failed: records.len() - passed },
            records,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per record, columns in [`CSV_COLUMNS`] order.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).expect("in-memory write");
        let opt = |x: Option<f64>| x.map(|v| format!("{v}")).unwrap_or_default();
        for r in &self.records {
            let values: Vec<String> = r.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
            w.write_record([
                r.key.clone(),
                r.check.clone(),
                r.channels.join(";"),
                opt(r.alpha),
                values.join(";"),
                opt(r.gap),
                opt(r.tolerance),
                r.pass.to_string(),
                r.error.clone().unwrap_or_default(),
                opt(r.wall_time_s),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

pub const CSV_COLUMNS: [&str; 10] =
    ["key", "check", "channels", "alpha", "values", "gap", "tolerance", "pass", "error", "wall_time_s"];

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CertificationReport {
        let a = Record::new("b_check", vec!["x".into()], Some(0.5)).value("v", 1.0).judged(1e-4, 1e-3);
        let b = Record::new("a_check", vec!["x".into(), "y".into()], None).judged(1.0, 1e-3);
        let c = Record::new("c_check", vec![], None).failed("boom");
        CertificationReport::new("verify", 7, 8, vec![0.5], vec![a, b, c], false)
    }

    #[test]
    fn records_sorted_and_counted() {
        let r = sample();
        let keys: Vec<&str> = r.records.iter().map(|r| r.key.as_str()).collect();
        assert_eq!(keys, ["a_check/x*y/-", "b_check/x/0.5", "c_check//-"]);
        assert_eq!(r.summary, Summary { total: 3, passed: 1, failed: 2 });
        assert!(!r.all_pass());
    }

    #[test]
    fn json_round_trip_and_timing_fields() {
        let r = sample();
        let text = r.to_json();
        assert!(!text.contains("generated_at_unix") && !text.contains("wall_time_s"));
        let back: CertificationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        let timed = CertificationReport::new("verify", 7, 8, vec![], vec![], true);
        assert!(timed.to_json().contains("generated_at_unix"));
    }

    #[test]
    fn csv_has_fixed_columns() {
        let text = sample().to_csv();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(text.lines().count(), 4);
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        for row in rd.records() {
            assert_eq!(row.unwrap().len(), CSV_COLUMNS.len());
        }
    }

    #[test]
    fn judging() {
        let r = Record::new("x", vec![], None).judged(-2e-3, 1e-3);
        assert!(!r.pass);
        let r = Record::new("x", vec![], None).judged(f64::NAN, 1e-3);
        assert!(!r.pass);
        let r = Record::new("x", vec![], None).judged(-5e-4, 1e-3);
        assert!(r.pass);
    }
}
