//! Report files: one JSON report and one CSV table per experiment, plus
//! `summary.json`. Layouts are described in docs/report-schema.md.

use std::fs;
use std::io;
use std::path::Path;

use lplevel::asymptotics::Row;
use serde_json::{json, Map, Value};

use crate::plan::Plan;
use crate::run::Outcome;

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 3] = ["lambda_or_s", "value", "error"];

/// Seventeen significant digits, enough to round-trip any f64.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn write_csv(path: &Path, rows: &[Row]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([format_number(r.x), format_number(r.value), format_number(r.error)])?;
    }
    w.flush()
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn report_document(plan: &Plan, outcome: &Outcome, seed: u64) -> Value {
    let inputs = json!({
        "function": plan.function,
        "dimension": plan.dimension,
        "tolerance": plan.tolerance,
        "rng_seed": seed,
        "task": plan.task,
    });
    let mut doc = Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert("name".into(), json!(plan.name));
    doc.insert("formula_id".into(), json!(plan.formula_id));
    doc.insert("description".into(), json!(plan.formula_id.description()));
    doc.insert("inputs".into(), inputs);
    match outcome {
        Ok(r) => {
            doc.insert("status".into(), json!(if r.passed { "passed" } else { "failed" }));
            doc.insert("measured".into(), finite_or_null(r.measured));
            doc.insert("reference".into(), finite_or_null(r.reference));
            doc.insert("rel_error".into(), finite_or_null(r.rel_error));
            doc.insert("passed".into(), json!(r.passed));
            let diagnostics: Vec<Value> =
                r.diagnostics.iter().map(|(k, v)| json!({ "name": k, "value": finite_or_null(*v) })).collect();
            doc.insert("diagnostics".into(), Value::Array(diagnostics));
            let table: Vec<Value> = r
                .table
                .iter()
                .map(|row| json!({ "x": finite_or_null(row.x), "value": finite_or_null(row.value), "error": finite_or_null(row.error) }))
                .collect();
            doc.insert("table".into(), Value::Array(table));
        }
        Err(e) => {
            doc.insert("status".into(), json!("error"));
            doc.insert("passed".into(), json!(false));
            doc.insert("error".into(), json!(e.to_string()));
        }
    }
    Value::Object(doc)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
}

/// Writes every report, CSV and the summary; returns the pass counts.
pub fn write_all(dir: &Path, plans: &[Plan], outcomes: &[Outcome], run_seed: u64) -> io::Result<Counts> {
    fs::create_dir_all(dir)?;
    let mut counts = Counts::default();
    let mut entries = Vec::with_capacity(plans.len());
    for (i, (plan, outcome)) in plans.iter().zip(outcomes).enumerate() {
        let seed = crate::plan::experiment_seed(run_seed, i);
        let doc = report_document(plan, outcome, seed);
        write_json(&dir.join(format!("{}.json", plan.name)), &doc)?;
        let status = match outcome {
            Ok(r) => {
                write_csv(&dir.join(format!("{}.csv", plan.name)), &r.table)?;
                if r.passed {
                    counts.passed += 1;
                    "passed"
                } else {
                    counts.failed += 1;
                    "failed"
                }
            }
            Err(_) => {
                counts.errored += 1;
                "error"
            }
        };
        entries.push(json!({
            "name": plan.name,
            "formula_id": plan.formula_id,
            "status": status,
            "rel_error": outcome.as_ref().map(|r| finite_or_null(r.rel_error)).unwrap_or(Value::Null),
            "tolerance": plan.tolerance,
        }));
    }
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "rng_seed": run_seed,
        "total": plans.len(),
        "passed": counts.passed,
        "failed": counts.failed,
        "errored": counts.errored,
        "experiments": entries,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(counts)
}

fn write_json(path: &Path, value: &Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}
