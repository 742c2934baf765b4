//! Report and data-file writers. Every file carries the config hash and seed.

use std::fs;
use std::path::Path;

use qdiff::verify::{Record, Status, VerificationReport};
use qdiff::RunConfig;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Identifies the configuration that produced an output.
#[derive(Debug, Clone, Serialize)]
pub struct Stamp {
    pub config_hash: String,
    pub seed: u64,
}

impl Stamp {
    pub fn of(cfg: &RunConfig) -> Self {
        let canonical = serde_json::to_string(cfg).expect("config serializes");
        Self {
            config_hash: hex::encode(Sha256::digest(canonical.as_bytes())),
            seed: cfg.seed,
        }
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

pub fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

/// CSV with a leading `# {json}` comment line.
pub fn csv_bytes(
    header: &serde_json::Value,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Vec<u8> {
    let mut out = format!(
        "# {}\n",
        serde_json::to_string(header).expect("header serializes")
    )
    .into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(columns).expect("write to memory");
        for row in rows {
            w.write_record(&row).expect("write to memory");
        }
        w.flush().expect("flush to memory");
    }
    out
}

fn status_tag(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::PassAtTolerance => "pass_at_tolerance",
        Status::Fail => "fail",
    }
}

fn record_row(i: usize, r: &Record) -> Vec<String> {
    vec![
        i.to_string(),
        r.check.to_string(),
        status_tag(r.status).to_string(),
        r.hard.to_string(),
        num(r.lhs),
        num(r.rhs),
        num(r.margin),
        serde_json::to_string(&r.params).expect("params serialize"),
        serde_json::to_string(&r.subject).expect("subject serializes"),
    ]
}

/// Writes `<tag>.json` and `<tag>.csv` into `dir`.
pub fn write_report(
    dir: &Path,
    stamp: &Stamp,
    cfg: &RunConfig,
    report: &VerificationReport,
) -> Result<(), CliError> {
    let tag = report.theorem.tag();
    let doc = json!({
        "config_hash": stamp.config_hash,
        "seed": stamp.seed,
        "config": cfg,
        "report": report,
    });
    write_file(&dir.join(format!("{tag}.json")), to_json(&doc).as_bytes())?;
    let header = json!({
        "theorem": tag,
        "config_hash": stamp.config_hash,
        "seed": stamp.seed,
        "summary": report.summary,
    });
    let bytes = csv_bytes(
        &header,
        &[
            "index", "check", "status", "hard", "lhs", "rhs", "margin", "params", "subject",
        ],
        report
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| record_row(i, r)),
    );
    write_file(&dir.join(format!("{tag}.csv")), &bytes)
}

pub fn summary_line(report: &VerificationReport) -> String {
    let s = &report.summary;
    let worst = s
        .worst_margin
        .map(|m| format!("{m:.3e}"))
        .unwrap_or_else(|| "n/a".into());
    format!(
        "{:<15} {}  records={} hard_failures={} soft_failures={} at_tolerance={} worst_margin={}",
        report.theorem.tag(),
        if s.passed { "PASS" } else { "FAIL" },
        s.records,
        s.hard_failures,
        s.soft_failures,
        s.at_tolerance,
        worst
    )
}
