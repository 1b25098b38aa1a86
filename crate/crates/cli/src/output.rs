//! Result documents and report files.
//!
//! Every file is written to a temporary sibling first and renamed into place,
//! so a failed run never leaves a partial file behind. Wall-clock timings go
//! to separate sidecar files; the documents themselves depend only on inputs
//! and seed and are byte-identical across repeated runs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use allrel::bench::{difficulty_ranking, BenchmarkRecord, SummaryRow};
use allrel::selection::{AttributeDecision, IterationRecord, RunConfig};
use serde::Serialize;

use crate::ingest::CodeTable;

pub const TOOL: &str = "allrel";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| std::io::Error::other(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct InputInfo {
    pub path: String,
    pub decision_column: String,
    pub n_objects: usize,
    pub n_attributes: usize,
}

/// Output of `select`.
#[derive(Debug, Clone, Serialize)]
pub struct SelectDocument {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub input: InputInfo,
    pub seed: u64,
    pub config: RunConfig,
    /// `class_labels[id]` is the label encoded as `id`.
    pub class_labels: Vec<String>,
    pub code_tables: Vec<CodeTable>,
    pub confirmed: Vec<String>,
    pub tentative: Vec<String>,
    pub attributes: Vec<AttributeDecision>,
    pub iterations_run: usize,
    pub budget_exhausted: bool,
    pub history: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub command: &'static str,
    pub wall_clock_seconds: f64,
}

/// Sidecar path holding the timing of the run that produced `doc`.
pub fn timing_path(doc: &Path) -> PathBuf {
    let mut name = doc.file_name().unwrap_or_default().to_os_string();
    name.push(".timing.json");
    doc.with_file_name(name)
}

/// Header document of a benchmark output directory.
#[derive(Debug, Clone, Serialize)]
pub struct BenchManifest<S: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub repetitions: usize,
    pub settings: S,
    pub records: usize,
}

pub fn records_jsonl(records: &[BenchmarkRecord]) -> serde_json::Result<Vec<u8>> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    Ok(out)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

fn cell_columns(cell: &allrel::bench::CellParams) -> [String; 5] {
    [
        cell.n_objects.to_string(),
        cell.n_attributes.to_string(),
        cell.base_set.clone().unwrap_or_default(),
        cell.num_trees.map(|t| t.to_string()).unwrap_or_default(),
        cell.control.to_string(),
    ]
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> csv::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn summary_csv(summary: &[SummaryRow]) -> csv::Result<Vec<u8>> {
    csv_bytes(
        &[
            "experiment", "objects", "attributes", "base_set", "trees", "control", "algorithm",
            "repetitions", "mean_tp", "mean_fp", "mean_fn", "mean_f", "sd_f", "mean_confirmed",
            "mean_certain_fp", "mean_retained",
        ],
        summary.iter().map(|s| {
            let mut row = vec![format!("{:?}", s.experiment)];
            row.extend(cell_columns(&s.cell));
            row.extend([
                format!("{:?}", s.algorithm),
                s.repetitions.to_string(),
                opt(s.mean_tp),
                opt(s.mean_fp),
                opt(s.mean_fn),
                opt(s.mean_f),
                opt(s.sd_f),
                format!("{}", s.mean_confirmed),
                opt(s.mean_certain_fp),
                opt(s.mean_retained),
            ]);
            row
        }),
    )
}

pub fn difficulty_csv(summary: &[SummaryRow]) -> csv::Result<Vec<u8>> {
    csv_bytes(
        &["rank", "objects", "attributes", "top_f", "boruta_f", "ace_f"],
        difficulty_ranking(summary)
            .into_iter()
            .enumerate()
            .map(|(k, (cell, t, b, a))| {
                vec![
                    (k + 1).to_string(),
                    cell.n_objects.to_string(),
                    cell.n_attributes.to_string(),
                    opt(t),
                    opt(b),
                    opt(a),
                ]
            }),
    )
}

/// Per-record wall-clock seconds, keyed like the records.
pub fn timing_csv(records: &[BenchmarkRecord]) -> csv::Result<Vec<u8>> {
    csv_bytes(
        &[
            "experiment", "objects", "attributes", "base_set", "trees", "control", "algorithm",
            "repetition", "seconds",
        ],
        records.iter().map(|r| {
            let mut row = vec![format!("{:?}", r.experiment)];
            row.extend(cell_columns(&r.cell));
            row.extend([
                format!("{:?}", r.algorithm),
                r.repetition.to_string(),
                format!("{:.3}", r.wall_clock_seconds),
            ]);
            row
        }),
    )
}

/// For every attribute confirmed at least once: how many repetitions
/// confirmed it at each tree count (separately for control runs). Set
/// intersections between forest sizes can be read off directly.
pub fn confirmed_sets_csv(records: &[BenchmarkRecord]) -> csv::Result<Vec<u8>> {
    let mut keys: Vec<(usize, bool)> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for r in records {
        let key = (r.cell.num_trees.unwrap_or(0), r.cell.control);
        if !keys.contains(&key) {
            keys.push(key);
        }
        for n in &r.selected {
            if !names.contains(n) {
                names.push(n.clone());
            }
        }
    }
    names.sort();
    let header: Vec<String> = std::iter::once("attribute".to_string())
        .chain(keys.iter().map(|&(t, c)| {
            if c {
                format!("trees_{t}_control")
            } else {
                format!("trees_{t}")
            }
        }))
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_bytes(
        &header_refs,
        names.iter().map(|name| {
            let mut row = vec![name.clone()];
            for &(t, c) in &keys {
                let hits = records
                    .iter()
                    .filter(|r| r.cell.num_trees.unwrap_or(0) == t && r.cell.control == c)
                    .filter(|r| r.selected.contains(name))
                    .count();
                row.push(hits.to_string());
            }
            row
        }),
    )
}
