//! Column-oriented information system: numeric attributes plus a decision.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Where an attribute came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    Original,
    Shadow,
    Noise,
    PermutedCopy,
}

impl Origin {
    /// True for attributes that are irrelevant by construction.
    pub fn is_artificial(self) -> bool {
        !matches!(self, Origin::Original)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeMeta {
    pub name: String,
    pub origin: Origin,
    /// Ground-truth relevance when known by design.
    pub relevant: Option<bool>,
    /// Index of the column this one was derived from, for artificial attributes.
    pub source: Option<usize>,
}

impl AttributeMeta {
    pub fn original(name: impl Into<String>) -> Self {
        AttributeMeta {
            name: name.into(),
            origin: Origin::Original,
            relevant: None,
            source: None,
        }
    }

    pub fn with_relevance(mut self, relevant: bool) -> Self {
        self.relevant = Some(relevant);
        self
    }
}

/// An immutable attribute matrix with a categorical decision.
///
/// Columns are reference counted, so selecting or augmenting attributes never
/// copies the untouched columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Arc<[f64]>>,
    meta: Vec<AttributeMeta>,
    decision: Arc<[u32]>,
    class_labels: Arc<[String]>,
    notes: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, checking shape, names, class ids and finiteness.
    pub fn new(
        columns: Vec<Vec<f64>>,
        meta: Vec<AttributeMeta>,
        decision: Vec<u32>,
        class_labels: Vec<String>,
    ) -> Result<Self> {
        let columns = columns.into_iter().map(Arc::from).collect();
        Self::from_parts(columns, meta, decision.into(), class_labels.into())
    }

    /// Convenience constructor: named columns, all tagged `Original`.
    pub fn from_columns<S: Into<String>>(
        columns: Vec<(S, Vec<f64>)>,
        decision: Vec<u32>,
        class_labels: Vec<String>,
    ) -> Result<Self> {
        let (meta, cols) = columns
            .into_iter()
            .map(|(name, col)| (AttributeMeta::original(name), col))
            .unzip();
        Self::new(cols, meta, decision, class_labels)
    }

    pub(crate) fn from_parts(
        columns: Vec<Arc<[f64]>>,
        meta: Vec<AttributeMeta>,
        decision: Arc<[u32]>,
        class_labels: Arc<[String]>,
    ) -> Result<Self> {
        let n = decision.len();
        if n == 0 || columns.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if columns.len() != meta.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} columns but {} metadata entries",
                columns.len(),
                meta.len()
            )));
        }
        let mut names = HashSet::with_capacity(meta.len());
        for (col, m) in columns.iter().zip(&meta) {
            if col.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "attribute '{}' has {} values, decision has {}",
                    m.name,
                    col.len(),
                    n
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "attribute '{}' has a non-finite value at object {}",
                    m.name, i
                )));
            }
            if !names.insert(m.name.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate attribute name '{}'",
                    m.name
                )));
            }
        }
        if let Some(&c) = decision.iter().find(|&&c| c as usize >= class_labels.len()) {
            return Err(Error::InvalidInput(format!(
                "class id {c} has no label ({} labels)",
                class_labels.len()
            )));
        }
        Ok(Dataset {
            columns,
            meta,
            decision,
            class_labels,
            notes: Vec::new(),
        })
    }

    pub fn n_objects(&self) -> usize {
        self.decision.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Arc<[f64]>] {
        &self.columns
    }

    pub fn decision(&self) -> &[u32] {
        &self.decision
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn meta(&self) -> &[AttributeMeta] {
        &self.meta
    }

    pub fn name(&self, j: usize) -> &str {
        &self.meta[j].name
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.meta.iter().position(|m| m.name == name)
    }

    /// Indices of attributes with the given origin.
    pub fn indices_with_origin(&self, origin: Origin) -> Vec<usize> {
        (0..self.n_attributes())
            .filter(|&j| self.meta[j].origin == origin)
            .collect()
    }

    /// Free-form provenance notes (generator choices and the like).
    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Number of distinct classes actually present in the decision.
    pub fn present_classes(&self) -> usize {
        let mut seen = vec![false; self.n_classes()];
        for &c in self.decision.iter() {
            seen[c as usize] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }

    /// New dataset restricted to `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        if let Some(&j) = indices.iter().find(|&&j| j >= self.n_attributes()) {
            return Err(Error::InvalidInput(format!(
                "attribute index {j} out of range"
            )));
        }
        let mut ds = Dataset::from_parts(
            indices.iter().map(|&j| self.columns[j].clone()).collect(),
            indices.iter().map(|&j| self.meta[j].clone()).collect(),
            self.decision.clone(),
            self.class_labels.clone(),
        )?;
        ds.notes = self.notes.clone();
        Ok(ds)
    }

    /// New dataset with extra columns appended after the existing ones.
    pub fn with_appended(
        &self,
        columns: Vec<Vec<f64>>,
        meta: Vec<AttributeMeta>,
    ) -> Result<Dataset> {
        let mut all_cols = self.columns.clone();
        all_cols.extend(columns.into_iter().map(Arc::<[f64]>::from));
        let mut all_meta = self.meta.clone();
        all_meta.extend(meta);
        let mut ds = Dataset::from_parts(
            all_cols,
            all_meta,
            self.decision.clone(),
            self.class_labels.clone(),
        )?;
        ds.notes = self.notes.clone();
        Ok(ds)
    }

    /// Replaces attribute metadata, keeping values. Lengths must agree.
    pub fn with_meta(&self, meta: Vec<AttributeMeta>) -> Result<Dataset> {
        let mut ds = Dataset::from_parts(
            self.columns.clone(),
            meta,
            self.decision.clone(),
            self.class_labels.clone(),
        )?;
        ds.notes = self.notes.clone();
        Ok(ds)
    }
}

/// Encodes string labels as ids in order of first appearance.
pub fn encode_labels<S: AsRef<str>>(raw: &[S]) -> (Vec<u32>, Vec<String>) {
    let mut labels: Vec<String> = Vec::new();
    let ids = raw
        .iter()
        .map(|s| {
            let s = s.as_ref();
            match labels.iter().position(|l| l == s) {
                Some(p) => p as u32,
                None => {
                    labels.push(s.to_string());
                    (labels.len() - 1) as u32
                }
            }
        })
        .collect();
    (ids, labels)
}
