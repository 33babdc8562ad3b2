//! Report serialization.
//!
//! Canonical JSON: objects with keys in byte order, two-space indentation,
//! floating-point values written with six decimals (`-0.000000` is written as
//! `0.000000`), non-finite values as `null`. Values under the top-level
//! `config` key are the one exception: they are echoed at full precision so
//! the config can be recovered from the report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fairpipe_core::pipeline::{LearnerResult, PipelineReport, TrainedModel};
use fairpipe_core::FairnessReport;
use serde_json::Value;

use crate::error::{FileError, Result};
use crate::io::{model_file_name, save_model, ModelFile};

pub const REPORT_FILE: &str = "report.json";
pub const TABLE_FILE: &str = "table2.txt";
pub const FIGURE_FILE: &str = "figure2.csv";
pub const MODELS_DIR: &str = "models";

pub fn fixed6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

pub fn canonical_json(report: &PipelineReport) -> Result<String> {
    let value = serde_json::to_value(report).map_err(|source| FileError::Serialize { what: "report", source })?;
    Ok(canonical_value(&value))
}

/// Canonical rendering of any JSON value (all floats fixed to six decimals
/// except below a top-level `config` key).
pub fn canonical_value(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0, true, true);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, indent: usize, fixed: bool, top: bool) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => write!(out, "{u}").unwrap(),
            (_, Some(i), _) => write!(out, "{i}").unwrap(),
            (_, _, Some(f)) if fixed => out.push_str(&fixed6(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                pad(out, indent + 1);
                write_value(out, item, indent + 1, fixed, false);
            }
            out.push('\n');
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                pad(out, indent + 1);
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                let fixed_child = fixed && !(top && key.as_str() == "config");
                write_value(out, &map[*key], indent + 1, fixed_child, false);
            }
            out.push('\n');
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => fixed6(x),
        Some(x) if x > 0.0 => "inf".into(),
        _ => "n/a".into(),
    }
}

fn metric_rows(r: Option<&FairnessReport>) -> [Option<f64>; 4] {
    match r {
        Some(r) => [r.balanced_acc, Some(r.di_score), r.avg_odd, r.eq_opp],
        None => [None; 4],
    }
}

fn learner_table(out: &mut String, spec: &str, l: &LearnerResult) {
    let before = metric_rows(l.original_for(spec));
    let after = metric_rows(l.transformed_for(spec));
    writeln!(out, "{}", l.name).unwrap();
    writeln!(out, "{:<10}{:>12}{:>14}", "", "Original", "Transformed").unwrap();
    for (i, label) in ["acc", "DI", "avg_odd", "eq_opp"].iter().enumerate() {
        writeln!(out, "{:<10}{:>12}{:>14}", label, cell(before[i]), cell(after[i])).unwrap();
    }
}

/// Plain-text table with one block per learner: rows acc, DI, avg_odd,
/// eq_opp; columns Original, Transformed. The DI row holds `|1 - DI|` for the
/// mitigation attribute on the test split.
pub fn table2_text(report: &PipelineReport) -> String {
    let spec = &report.config.mitigation_spec;
    let mut out = String::new();
    writeln!(out, "Fairness and classification results").unwrap();
    writeln!(out, "protected attribute: {spec}; metrics on {}; DI row = |1 - DI|", report.metrics_scope).unwrap();
    if let Some(a) = report.dataset_audit.iter().find(|a| &a.spec_name == spec) {
        writeln!(out, "dataset-level DI score: {}", cell(Some(a.di_score))).unwrap();
    }
    for l in &report.learners {
        out.push('\n');
        learner_table(&mut out, spec, l);
    }
    if let Some(e) = &report.error {
        writeln!(out, "\nerror at stage {}: {}", e.stage, e.message).unwrap();
    }
    out
}

/// Method comparison CSV, present only when post-processing ran: the
/// reweighed model (RW), the post-processed original model (CEOD) and the
/// unmitigated original model (none).
pub fn figure2_csv(report: &PipelineReport) -> Option<String> {
    let posthoc = report.posthoc.as_ref()?;
    let spec = &report.config.mitigation_spec;
    let learner = report.learners.iter().find(|l| l.name == posthoc.learner)?;
    let mut out = String::from("method,balanced_accuracy,di_score\n");
    let rows = [("RW", learner.transformed_for(spec)), ("CEOD", Some(&posthoc.report)), ("none", learner.original_for(spec))];
    for (method, r) in rows {
        let (acc, di) = r.map_or((None, None), |r| (r.balanced_acc, Some(r.di_score)));
        writeln!(out, "{method},{},{}", cell(acc), cell(di)).unwrap();
    }
    Some(out)
}

/// Writes the report files (and any models) into `dir`, returning the paths written.
pub fn render_report(report: &PipelineReport, models: &[TrainedModel], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| FileError::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| FileError::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    put(REPORT_FILE, canonical_json(report)?)?;
    put(TABLE_FILE, table2_text(report))?;
    if let Some(csv) = figure2_csv(report) {
        put(FIGURE_FILE, csv)?;
    }
    if !models.is_empty() {
        let mdir = dir.join(MODELS_DIR);
        fs::create_dir_all(&mdir).map_err(|e| FileError::io(&mdir, e))?;
        for m in models {
            let path = mdir.join(model_file_name(&m.learner, m.variant));
            save_model(&path, &ModelFile::new(&m.learner, m.variant, m.model.clone()))?;
            written.push(path);
        }
    }
    Ok(written)
}
