//! Report rows, CSV emission and the JSON summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Denominator below the degeneracy threshold; never counted as a pass.
    Skipped,
    /// Informational row with no assertion attached.
    Report,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
            Status::Report => "report",
        }
    }

    pub fn check(measured: f64, bound: f64) -> Status {
        if measured <= bound {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub experiment: String,
    pub n: usize,
    pub p: Option<f64>,
    pub trial: Option<usize>,
    pub ratio: f64,
    pub normalized_constant: f64,
    pub bound: Option<f64>,
    pub status: Status,
}

impl ReportRow {
    pub fn new(experiment: &str, n: usize) -> Self {
        Self {
            experiment: experiment.to_string(),
            n,
            p: None,
            trial: None,
            ratio: 0.0,
            normalized_constant: 0.0,
            bound: None,
            status: Status::Report,
        }
    }

    pub fn p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn trial(mut self, trial: usize) -> Self {
        self.trial = Some(trial);
        self
    }

    /// Measured value with its normalized constant, informational only.
    pub fn report(mut self, ratio: f64, normalized: f64) -> Self {
        self.ratio = ratio;
        self.normalized_constant = normalized;
        self.status = Status::Report;
        self
    }

    /// Asserts `normalized ≤ bound`.
    pub fn assert(mut self, ratio: f64, normalized: f64, bound: f64) -> Self {
        self.ratio = ratio;
        self.normalized_constant = normalized;
        self.bound = Some(bound);
        self.status = Status::check(normalized, bound);
        self
    }

    /// Row whose denominator fell below the degeneracy threshold.
    pub fn skipped(mut self, bound: Option<f64>) -> Self {
        self.bound = bound;
        self.status = Status::Skipped;
        self
    }

    pub fn is_failure(&self) -> bool {
        self.status == Status::Fail
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "experiment",
    "n",
    "p",
    "trial",
    "ratio",
    "normalized_constant",
    "bound",
    "pass",
];

/// CSV text with the fixed column set; floats use shortest round-trip form.
pub fn to_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.n.to_string(),
            r.p.map(fmt_f64).unwrap_or_default(),
            r.trial.map(|t| t.to_string()).unwrap_or_default(),
            fmt_f64(r.ratio),
            fmt_f64(r.normalized_constant),
            r.bound.map(fmt_f64).unwrap_or_default(),
            r.status.as_str().to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ExperimentSummary {
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub reported: usize,
    /// Largest normalized constant over asserted rows.
    pub max_asserted: Option<f64>,
    /// Largest normalized constant over all non-skipped rows.
    pub max_observed: Option<f64>,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub passed: bool,
    pub experiments: BTreeMap<String, ExperimentSummary>,
}

fn json_max(a: Option<f64>, b: f64) -> Option<f64> {
    if !b.is_finite() {
        return a;
    }
    Some(a.map_or(b, |a| a.max(b)))
}

pub fn summarize(rows: &[ReportRow]) -> Summary {
    let mut experiments: BTreeMap<String, ExperimentSummary> = BTreeMap::new();
    for r in rows {
        let e = experiments.entry(r.experiment.clone()).or_default();
        e.rows += 1;
        match r.status {
            Status::Pass => e.passed += 1,
            Status::Fail => e.failed += 1,
            Status::Skipped => e.skipped += 1,
            Status::Report => e.reported += 1,
        }
        if matches!(r.status, Status::Pass | Status::Fail) {
            e.max_asserted = json_max(e.max_asserted, r.normalized_constant);
            e.bound = r.bound.or(e.bound);
        }
        if r.status != Status::Skipped {
            e.max_observed = json_max(e.max_observed, r.normalized_constant);
        }
    }
    Summary {
        passed: rows.iter().all(|r| !r.is_failure()),
        experiments,
    }
}

/// Writes `report.csv` and `summary.json` into `dir`.
pub fn write_reports(dir: &Path, rows: &[ReportRow]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.csv"), to_csv(rows)?)?;
    let summary = serde_json::to_string_pretty(&summarize(rows))?;
    std::fs::write(dir.join("summary.json"), summary + "\n")?;
    Ok(())
}

/// Human-readable dump of failing rows.
pub fn failure_dump(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    for r in rows.iter().filter(|r| r.is_failure()) {
        let _ = writeln!(
            out,
            "FAIL {} n={} p={} trial={} value={} bound={}",
            r.experiment,
            r.n,
            r.p.map(fmt_f64).unwrap_or_else(|| "-".into()),
            r.trial.map(|t| t.to_string()).unwrap_or_else(|| "-".into()),
            fmt_f64(r.normalized_constant),
            r.bound.map(fmt_f64).unwrap_or_else(|| "-".into()),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = vec![
            ReportRow::new("lipschitz", 4).p(2.0).trial(3).assert(0.5, 0.25, 10.0),
            ReportRow::new("logn", 8).p(f64::INFINITY).report(1.5, 0.5),
            ReportRow::new("bmo", 2).trial(0).skipped(Some(100.0)),
        ];
        let text = to_csv(&rows).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "experiment,n,p,trial,ratio,normalized_constant,bound,pass");
        assert_eq!(lines[1], "lipschitz,4,2,3,0.5,0.25,10,pass");
        assert_eq!(lines[2], "logn,8,inf,,1.5,0.5,,report");
        assert_eq!(lines[3], "bmo,2,,0,0,0,100,skipped");
    }

    #[test]
    fn summary_counts() {
        let rows = vec![
            ReportRow::new("a", 2).assert(1.0, 1.0, 2.0),
            ReportRow::new("a", 2).assert(3.0, 3.0, 2.0),
            ReportRow::new("a", 2).skipped(None),
            ReportRow::new("b", 2).report(7.0, 7.0),
        ];
        let s = summarize(&rows);
        assert!(!s.passed);
        let a = &s.experiments["a"];
        assert_eq!((a.passed, a.failed, a.skipped), (1, 1, 1));
        assert_eq!(a.max_asserted, Some(3.0));
        assert_eq!(s.experiments["b"].max_observed, Some(7.0));
        assert!(failure_dump(&rows).starts_with("FAIL a n=2"));
    }
}
