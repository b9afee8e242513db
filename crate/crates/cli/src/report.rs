//! Report document and CSV tables.

use std::fmt::Write as _;

use evpos::analyzer::{EventualPositivityResult, PositivityScan, ResolventMargin, SpectralCertificate};
use evpos::models::DominanceScan;
use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;

pub const SERIES_HEADER: &str = "t,min_margin,B_t,min_entry";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    /// Seconds since the Unix epoch. The only field that differs between
    /// deterministic reruns; pretty printing keeps it on a line of its own.
    pub timestamp_unix: u64,
    pub deterministic: bool,
    /// Effective configuration after command-line overrides and grid defaults.
    pub config: AnalysisConfig,
    pub certificate: Option<SpectralCertificate>,
    pub result: Option<AnalysisResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dominance_scan: Option<DominanceScan>,
    pub caveats: Vec<String>,
    pub error: Option<ErrorReport>,
    /// Omitted in deterministic mode.
    pub timings: Option<Timings>,
    /// Files written next to the report.
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalysisResult {
    Bound(EventualPositivityResult),
    Scan(PositivityScan),
    Resolvent { margins: Vec<ResolventMargin> },
    Sweep { parameter: String, rows: Vec<SweepPoint> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub passed: bool,
    pub reasons: String,
    pub gap: Option<f64>,
    pub t0: Option<f64>,
    pub epsilon: Option<f64>,
    pub min_entry: Option<f64>,
    pub first_nonneg_time: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub exit_code: u8,
    pub message: String,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Timings {
    pub build_ms: f64,
    pub certificate_ms: f64,
    pub analysis_ms: f64,
    pub total_ms: f64,
}

fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:?}"),
        Some(v) => format!("{v}").to_lowercase(),
        None => String::new(),
    }
}

/// One row per sample.
pub fn series_csv(rows: impl IntoIterator<Item = (f64, Option<f64>, Option<f64>, Option<f64>)>) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for (t, m, b, e) in rows {
        let _ = writeln!(out, "{t:?},{},{},{}", cell(m), cell(b), cell(e));
    }
    out
}

pub fn sweep_csv(parameter: &str, rows: &[SweepPoint]) -> String {
    let mut out = format!("{parameter},gap,t0,epsilon,first_nonneg_time\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:?},{},{},{},{}",
            r.value,
            cell(r.gap),
            cell(r.t0),
            cell(r.epsilon),
            cell(r.first_nonneg_time)
        );
    }
    out
}
