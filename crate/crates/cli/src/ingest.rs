//! CSV ingestion and export.
//!
//! Numeric columns become attributes as-is. A column with any non-numeric
//! cell is treated as categorical and integer-coded in order of first
//! appearance; the code table travels with the dataset so result documents
//! can embed it.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use allrel::{AttributeMeta, Dataset};
use serde::{Deserialize, Serialize};

/// Cell contents treated as a missing value.
pub const MISSING_TOKENS: [&str; 4] = ["", "NA", "?", "NaN"];

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Parse(String),
    #[error("missing header row")]
    NoHeader,
    #[error("decision column '{0}' not found in header")]
    NoDecisionColumn(String),
    #[error("no attribute columns besides the decision")]
    NoAttributes,
    #[error("no data rows")]
    NoRows,
    #[error("missing value at row {row}, column '{column}'")]
    MissingValue { row: usize, column: String },
    #[error("invalid dataset: {0}")]
    Invalid(#[from] allrel::Error),
}

/// Integer codes assigned to the levels of a categorical column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeTable {
    pub column: String,
    /// `levels[k]` is encoded as `k`.
    pub levels: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    pub decision_column: String,
    pub code_tables: Vec<CodeTable>,
}

fn is_missing(cell: &str) -> bool {
    MISSING_TOKENS.contains(&cell.trim())
}

/// Reads a CSV file. `decision_column` defaults to the last column.
pub fn ingest_csv(path: &Path, decision_column: Option<&str>) -> Result<Ingested, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_reader(file, decision_column)
}

pub fn ingest_reader<R: Read>(reader: R, decision_column: Option<&str>) -> Result<Ingested, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| IngestError::Parse(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(IngestError::NoHeader);
    }
    let target = match decision_column {
        Some(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::NoDecisionColumn(name.to_string()))?,
        None => header.len() - 1,
    };
    if header.len() < 2 {
        return Err(IngestError::NoAttributes);
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (r, record) in rdr.records().enumerate() {
        // rows are numbered as in the file, header being row 1
        let row = r + 2;
        let record = record.map_err(|e| IngestError::Parse(e.to_string()))?;
        for (c, cell) in record.iter().enumerate() {
            if is_missing(cell) {
                return Err(IngestError::MissingValue {
                    row,
                    column: header[c].clone(),
                });
            }
            cells[c].push(cell.trim().to_string());
        }
    }
    if cells[0].is_empty() {
        return Err(IngestError::NoRows);
    }

    let (decision, class_labels) = allrel::dataset::encode_labels(&cells[target]);
    let mut columns = Vec::with_capacity(header.len() - 1);
    let mut meta = Vec::with_capacity(header.len() - 1);
    let mut code_tables = Vec::new();
    for (c, raw) in cells.iter().enumerate() {
        if c == target {
            continue;
        }
        let numeric: Option<Vec<f64>> = raw
            .iter()
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        let values = match numeric {
            Some(v) => v,
            None => {
                let (codes, levels) = allrel::dataset::encode_labels(raw);
                code_tables.push(CodeTable {
                    column: header[c].clone(),
                    levels,
                });
                codes.into_iter().map(f64::from).collect()
            }
        };
        columns.push(values);
        meta.push(AttributeMeta::original(header[c].clone()));
    }
    let dataset = Dataset::new(columns, meta, decision, class_labels)?;
    if dataset.present_classes() < 2 {
        return Err(allrel::Error::SingleClass(dataset.class_labels()[0].clone()).into());
    }
    Ok(Ingested {
        dataset,
        decision_column: header[target].clone(),
        code_tables,
    })
}

/// Writes attributes followed by a `class` column holding the labels.
/// Values use the shortest representation that parses back exactly.
pub fn write_csv<W: Write>(data: &Dataset, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = data.meta().iter().map(|m| m.name.as_str()).collect();
    header.push("class");
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..data.n_objects() {
        row.clear();
        row.extend((0..data.n_attributes()).map(|j| data.column(j)[i].to_string()));
        row.push(data.class_labels()[data.decision()[i] as usize].clone());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
