//! Cohort persistence: a CSV of records plus a JSON sidecar holding the
//! generating config and format version.
//!
//! CSV header: `id,label,synthetic_counter,p53_conc,mass_0..mass_{W-1},
//! max_mass,steady_state_mass,detection_mass,seed`. Floats are written in
//! plain decimal with 17 significant digits, so save/load is bit-exact.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Cohort, CohortConfig, Label, PatientRecord, Result, SynthesisError};
use crate::{fsio, numfmt};

pub const COHORT_FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    format_version: u64,
    config: CohortConfig,
}

/// `cohort.csv` -> `cohort.meta.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

fn header(window: usize) -> String {
    let mut cols = vec!["id".to_string(), "label".into(), "synthetic_counter".into(), "p53_conc".into()];
    cols.extend((0..window).map(|i| format!("mass_{i}")));
    cols.extend(["max_mass", "steady_state_mass", "detection_mass", "seed"].map(String::from));
    cols.join(",")
}

pub fn write_cohort_csv(cohort: &Cohort, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{}", header(cohort.config.window))?;
    for r in &cohort.records {
        write!(out, "{},{},{},{}", r.id, r.label.bit(), u8::from(r.synthetic_counter), numfmt::exact(r.p53_conc))?;
        for m in &r.mass_series {
            write!(out, ",{}", numfmt::exact(*m))?;
        }
        writeln!(
            out,
            ",{},{},{},{}",
            numfmt::exact(r.max_mass),
            numfmt::exact(r.steady_state_mass),
            numfmt::exact(r.detection_mass),
            r.seed
        )?;
    }
    Ok(())
}

pub fn write_sidecar(cohort: &Cohort, out: &mut dyn Write) -> std::io::Result<()> {
    let sidecar = Sidecar { format_version: cohort.format_version, config: cohort.config.clone() };
    serde_json::to_writer_pretty(&mut *out, &sidecar)?;
    writeln!(out)
}

/// Writes `path` and its sidecar. Each file appears complete or not at all.
pub fn save_cohort(cohort: &Cohort, path: &Path) -> Result<()> {
    let io_err = |p: &Path| {
        let p = p.to_path_buf();
        move |source| SynthesisError::Io { path: p, source }
    };
    let side = sidecar_path(path);
    fsio::write_atomic(&side, |w| write_sidecar(cohort, w)).map_err(io_err(&side))?;
    fsio::write_atomic(path, |w| write_cohort_csv(cohort, w)).map_err(io_err(path))?;
    Ok(())
}

fn parse_sidecar(text: &str, path: &Path) -> Result<(u64, CohortConfig)> {
    let bad = |message: String| SynthesisError::Sidecar { path: path.to_path_buf(), message };
    let value: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let version = value
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("missing or non-integer field `format_version`".into()))?;
    if version != COHORT_FORMAT_VERSION {
        return Err(SynthesisError::Version(version));
    }
    let sidecar: Sidecar = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
    Ok((version, sidecar.config))
}

fn parse_row(line: &str, line_no: usize, window: usize) -> Result<PatientRecord> {
    let err = |message: String| SynthesisError::Parse { line: line_no, message };
    let fields: Vec<&str> = line.split(',').collect();
    let expected = window + 8;
    if fields.len() != expected {
        return Err(err(format!("expected {expected} fields, found {}", fields.len())));
    }
    let float = |i: usize, name: &str| -> Result<f64> {
        fields[i]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(format!("field `{name}`: invalid number `{}`", fields[i])))
    };
    let id = fields[0].parse::<u64>().map_err(|_| err(format!("field `id`: invalid integer `{}`", fields[0])))?;
    let label = fields[1]
        .parse::<u8>()
        .ok()
        .and_then(Label::from_bit)
        .ok_or_else(|| err(format!("field `label`: expected 0 or 1, found `{}`", fields[1])))?;
    let synthetic_counter = match fields[2] {
        "0" => false,
        "1" => true,
        other => return Err(err(format!("field `synthetic_counter`: expected 0 or 1, found `{other}`"))),
    };
    let p53_conc = float(3, "p53_conc")?;
    let mass_series = (0..window).map(|i| float(4 + i, &format!("mass_{i}"))).collect::<Result<Vec<_>>>()?;
    let base = 4 + window;
    let seed = fields[base + 3]
        .parse::<u64>()
        .map_err(|_| err(format!("field `seed`: invalid integer `{}`", fields[base + 3])))?;
    Ok(PatientRecord {
        id,
        label,
        synthetic_counter,
        p53_conc,
        mass_series,
        max_mass: float(base, "max_mass")?,
        steady_state_mass: float(base + 1, "steady_state_mass")?,
        detection_mass: float(base + 2, "detection_mass")?,
        seed,
    })
}

/// Parses cohort CSV text against an already loaded config.
pub fn read_cohort(csv: &str, config: CohortConfig, format_version: u64) -> Result<Cohort> {
    if format_version != COHORT_FORMAT_VERSION {
        return Err(SynthesisError::Version(format_version));
    }
    let mut lines = csv.split('\n').enumerate();
    let expected_header = header(config.window);
    match lines.next() {
        Some((_, h)) if h == expected_header => {}
        Some((_, h)) => return Err(SynthesisError::Parse { line: 1, message: format!("unexpected header `{h}`") }),
        None => unreachable!("split always yields one item"),
    }
    let mut records = Vec::new();
    let mut last_line = 1;
    let mut saw_terminator = false;
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            // Only the final element after the trailing LF may be empty.
            saw_terminator = true;
            continue;
        }
        if saw_terminator {
            return Err(SynthesisError::Parse { line: line_no - 1, message: "blank line inside data".into() });
        }
        let record = parse_row(line, line_no, config.window)?;
        record
            .validate(config.window, config.k)
            .map_err(|e| SynthesisError::Parse { line: line_no, message: e.to_string() })?;
        records.push(record);
        last_line = line_no;
    }
    if !csv.ends_with('\n') {
        return Err(SynthesisError::Parse { line: last_line, message: "file does not end with a newline".into() });
    }
    let expected = config.n_benign + config.n_malignant + config.n_counter;
    if records.len() != expected {
        return Err(SynthesisError::Parse {
            line: last_line + 1,
            message: format!("expected {expected} records, found {}", records.len()),
        });
    }
    let cohort = Cohort { records, config, format_version };
    cohort.validate()?;
    Ok(cohort)
}

pub fn load_cohort(path: &Path) -> Result<Cohort> {
    let read =
        |p: &Path| fsio::read_to_string(p).map_err(|source| SynthesisError::Io { path: p.to_path_buf(), source });
    let csv = read(path)?;
    let side = sidecar_path(path);
    let (version, config) = parse_sidecar(&read(&side)?, &side)?;
    config.validate()?;
    read_cohort(&csv, config, version)
}
