//! Outcome types shared by the selection wrappers.

use serde::{Deserialize, Serialize};

use crate::ace::AceConfig;
use crate::boruta::BorutaConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionStatus {
    Confirmed,
    Rejected,
    Tentative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDecision {
    pub name: String,
    /// Column index in the dataset handed to the wrapper.
    pub index: usize,
    pub status: SelectionStatus,
    pub hit_count: usize,
    /// Iteration (Boruta) or stage (ACE) at which the status became final.
    pub decided_at: Option<usize>,
    /// Mean z-score over the iterations the attribute took part in.
    pub mean_importance: f64,
    /// Mean raw decrease of accuracy over the same iterations.
    pub mean_raw_importance: f64,
}

/// Importance snapshot of one forest inside a wrapper run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// ACE stage the replicate belongs to; absent for Boruta.
    pub stage: Option<usize>,
    /// Contrast level the attributes were compared with: the maximal shadow
    /// z-score for Boruta, the configured shadow quantile for ACE.
    pub shadow_threshold: f64,
    /// z-score per original attribute, `None` when it was not part of the forest.
    pub z_scores: Vec<Option<f64>>,
    pub raw: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm")]
pub enum RunConfig {
    Boruta(BorutaConfig),
    Ace(AceConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub attributes: Vec<AttributeDecision>,
    /// Forests trained by the run.
    pub iterations_run: usize,
    pub history: Vec<IterationRecord>,
    pub config: RunConfig,
    /// Set when a wall-clock budget cut the run short.
    pub budget_exhausted: bool,
}

impl SelectionResult {
    pub fn with_status(&self, status: SelectionStatus) -> Vec<&AttributeDecision> {
        self.attributes.iter().filter(|a| a.status == status).collect()
    }

    pub fn confirmed_indices(&self) -> Vec<usize> {
        self.with_status(SelectionStatus::Confirmed)
            .into_iter()
            .map(|a| a.index)
            .collect()
    }

    pub fn confirmed_names(&self) -> Vec<String> {
        self.with_status(SelectionStatus::Confirmed)
            .into_iter()
            .map(|a| a.name.clone())
            .collect()
    }

    pub fn count(&self, status: SelectionStatus) -> usize {
        self.attributes.iter().filter(|a| a.status == status).count()
    }
}

/// Running sums for per-attribute mean importances.
#[derive(Debug, Clone, Default)]
pub(crate) struct ImportanceTally {
    z: Vec<f64>,
    raw: Vec<f64>,
    n: Vec<usize>,
}

impl ImportanceTally {
    pub(crate) fn new(p: usize) -> Self {
        ImportanceTally {
            z: vec![0.0; p],
            raw: vec![0.0; p],
            n: vec![0; p],
        }
    }

    pub(crate) fn add(&mut self, j: usize, z: f64, raw: f64) {
        self.z[j] += z;
        self.raw[j] += raw;
        self.n[j] += 1;
    }

    pub(crate) fn means(&self, j: usize) -> (f64, f64) {
        if self.n[j] == 0 {
            (0.0, 0.0)
        } else {
            (self.z[j] / self.n[j] as f64, self.raw[j] / self.n[j] as f64)
        }
    }
}
