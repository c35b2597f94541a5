//! CSV/JSON report emission and the published comparison rows.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use super::{MetricsReport, ReportRow};
use crate::data::SignalKind;

/// A published result for the benchmark, shown for context only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub method: &'static str,
    pub artifact: SignalKind,
    pub rrmse_t: f64,
    pub rrmse_f: f64,
    pub cc: f64,
}

const fn r(method: &'static str, artifact: SignalKind, t: f64, f: f64, cc: f64) -> ReferenceRow {
    ReferenceRow {
        method,
        artifact,
        rrmse_t: t,
        rrmse_f: f,
        cc,
    }
}

/// Summary metrics averaged over −7..2 dB as published for the benchmark
/// (EMG = muscular, EOG = ocular).
const REFERENCES: &[ReferenceRow] = &[
    r("FCNN", SignalKind::Emg, 0.585, 0.580, 0.796),
    r("Simple CNN", SignalKind::Emg, 0.646, 0.649, 0.783),
    r("Complex CNN", SignalKind::Emg, 0.650, 0.633, 0.780),
    r("RNN", SignalKind::Emg, 0.570, 0.530, 0.812),
    r("Novel CNN", SignalKind::Emg, 0.448, 0.442, 0.863),
    r("DeepSeparator", SignalKind::Emg, 0.712, 0.717, 0.734),
    r("EEGDnet", SignalKind::Emg, 0.677, 0.626, 0.732),
    r("frequency-conditioned model", SignalKind::Emg, 0.573, 0.496, 0.805),
    r("DeepSeparator", SignalKind::Eog, 0.705, 0.747, 0.769),
    r("EEGDnet", SignalKind::Eog, 0.497, 0.491, 0.868),
    r("frequency-conditioned model", SignalKind::Eog, 0.405, 0.490, 0.917),
];

pub fn reference_rows(kind: SignalKind) -> Vec<ReferenceRow> {
    REFERENCES.iter().copied().filter(|r| r.artifact == kind).collect()
}

/// `artifact,snr_db,rrmse_t,rrmse_f,cc,n`, one row per level and a final
/// `summary` row.
pub fn report_csv(report: &MetricsReport) -> String {
    let mut s = String::from("artifact,snr_db,rrmse_t,rrmse_f,cc,n\n");
    let kind = report.artifact_kind;
    for row in &report.rows {
        let _ = writeln!(
            s,
            "{kind},{},{},{},{},{}",
            row.snr_db, row.rrmse_t, row.rrmse_f, row.cc, row.n_examples
        );
    }
    let m = &report.summary;
    let _ = writeln!(
        s,
        "{kind},summary,{},{},{},{}",
        m.rrmse_t, m.rrmse_f, m.cc, m.n_examples
    );
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowSource {
    Measured,
    Baseline,
    Published,
}

/// One line of the summary comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub method: String,
    pub source: RowSource,
    pub rrmse_t: f64,
    pub rrmse_f: f64,
    pub cc: f64,
}

fn comparison_rows(report: &MetricsReport, baselines: &[MetricsReport]) -> Vec<ComparisonRow> {
    let from = |r: &MetricsReport, source| ComparisonRow {
        method: r.method.clone(),
        source,
        rrmse_t: r.summary.rrmse_t,
        rrmse_f: r.summary.rrmse_f,
        cc: r.summary.cc,
    };
    let mut rows = vec![from(report, RowSource::Measured)];
    rows.extend(baselines.iter().map(|b| from(b, RowSource::Baseline)));
    rows.extend(reference_rows(report.artifact_kind).into_iter().map(|p| ComparisonRow {
        method: p.method.into(),
        source: RowSource::Published,
        rrmse_t: p.rrmse_t,
        rrmse_f: p.rrmse_f,
        cc: p.cc,
    }));
    rows
}

/// Summary table in the benchmark layout: the measured model, the
/// baselines scored on the same mixtures, and the published numbers.
pub fn comparison_csv(report: &MetricsReport, baselines: &[MetricsReport]) -> String {
    let mut s = String::from("artifact,method,source,rrmse_t,rrmse_f,cc\n");
    for row in comparison_rows(report, baselines) {
        let source = match row.source {
            RowSource::Measured => "measured",
            RowSource::Baseline => "baseline",
            RowSource::Published => "published",
        };
        let _ = writeln!(
            s,
            "{},{},{source},{},{},{}",
            report.artifact_kind, row.method, row.rrmse_t, row.rrmse_f, row.cc
        );
    }
    s
}

fn row_json(row: &ReportRow) -> Value {
    json!({
        "snr_db": row.snr_db,
        "rrmse_t": row.rrmse_t,
        "rrmse_f": row.rrmse_f,
        "cc": row.cc,
        "n": row.n_examples,
    })
}

/// JSON mirror of [`report_csv`] plus the comparison table.
pub fn report_json(report: &MetricsReport, baselines: &[MetricsReport]) -> Value {
    json!({
        "artifact": report.artifact_kind,
        "method": report.method,
        "rows": report.rows.iter().map(row_json).collect::<Vec<_>>(),
        "summary": row_json(&report.summary),
        "comparison": comparison_rows(report, baselines),
    })
}
