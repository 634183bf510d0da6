//! JSON envelopes and CSV tables. Layout version 1:
//!
//! `<command>.json`: `{schema_version, command, preset, seed, status,
//! invariants: [{name, passed, detail}], config, result}` where `status` is
//! `"ok"` or `"invariant_failure"`.
//!
//! `error.json`: `{schema_version, command, status: "error", error: {kind, message}}`.
//!
//! CSV files carry a header row; vectors inside a field are joined with `;`.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Invariant {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Invariant {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Invariant {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, header: &'static [&'static str]) -> Self {
        Table {
            file: file.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// What a command produced, before it is written to disk.
#[derive(Debug, Clone)]
pub struct Report {
    pub result: Value,
    pub tables: Vec<Table>,
    pub invariants: Vec<Invariant>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.invariants.iter().all(|i| i.passed)
    }
}

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn nums(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";")
}

pub fn write_report(dir: &Path, command: &str, preset: &str, seed: u64, config: &Value, report: &Report) -> Result<()> {
    fs::create_dir_all(dir)?;
    let envelope = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "preset": preset,
        "seed": seed,
        "status": if report.passed() { "ok" } else { "invariant_failure" },
        "invariants": report.invariants,
        "config": config,
        "result": report.result,
    });
    write_json(&dir.join(format!("{command}.json")), &envelope)?;
    for table in &report.tables {
        let mut w = csv::Writer::from_path(dir.join(&table.file))?;
        w.write_record(table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn write_error(dir: &Path, command: &str, err: &Error) -> Result<()> {
    fs::create_dir_all(dir)?;
    let envelope = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "status": "error",
        "error": { "kind": error_kind(err), "message": err.to_string() },
    });
    write_json(&dir.join("error.json"), &envelope)
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::NotUnit { .. } => "not_unit",
        Error::Dimension { .. } => "dimension",
        Error::UnsupportedDimension(_) => "unsupported_dimension",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::NonFinite(_) => "non_finite",
        Error::ZeroJump(..) => "zero_jump",
        Error::IncompatibleGrids(_) => "incompatible_grids",
        Error::CertificateViolation { .. } => "certificate_violation",
        Error::Internal(_) => "internal",
        Error::Config(_) => "config",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::Csv(_) => "csv",
    }
}
