//! Boruta: repeated forests on shadow-extended data, hits against the best
//! shadow, and exact binomial tests to confirm or reject attributes.

use serde::{Deserialize, Serialize};

use crate::contrast::add_shadow_attributes;
use crate::dataset::{Dataset, Origin};
use crate::forest::{permutation_importance, train_forest, ForestConfig};
use crate::selection::{
    AttributeDecision, ImportanceTally, IterationRecord, RunConfig, SelectionResult,
    SelectionStatus,
};
use crate::stats::{lower_tail_half, upper_tail_half};
use crate::{rng, Error, Result};

/// No attribute is decided before this many iterations.
pub const FIRST_DECISION_ITERATION: usize = 3;

const TAG_SHADOW: u64 = 1;
const TAG_FOREST: u64 = 2;
const TAG_IMPORTANCE: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorutaConfig {
    pub max_runs: usize,
    pub alpha: f64,
    /// Template for every iteration's forest; its seed is replaced by a
    /// per-iteration seed derived from `seed`.
    pub forest: ForestConfig,
    pub seed: u64,
}

impl Default for BorutaConfig {
    fn default() -> Self {
        BorutaConfig {
            max_runs: 100,
            alpha: 0.01,
            forest: ForestConfig::default(),
            seed: 0,
        }
    }
}

impl BorutaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_runs < 3 {
            return Err(Error::InvalidConfig(format!(
                "maxRuns must be at least 3, got {}",
                self.max_runs
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Confirm,
    Reject,
    Undecided,
}

/// `hit[i]` is true when `importances[i]` strictly exceeds `shadow_max`.
pub fn hit_test(importances: &[f64], shadow_max: f64) -> Vec<bool> {
    importances.iter().map(|&z| z > shadow_max).collect()
}

/// Two one-sided exact binomial tests of `hits` out of `trials` against
/// p = 1/2, Bonferroni-corrected over `undecided` attributes.
pub fn binomial_decision(hits: usize, trials: usize, alpha: f64, undecided: usize) -> Result<Decision> {
    if hits > trials {
        return Err(Error::InvalidInput(format!(
            "{hits} hits in only {trials} trials"
        )));
    }
    if trials == 0 || undecided == 0 {
        return Err(Error::InvalidInput(
            "trials and undecided count must be positive".into(),
        ));
    }
    let level = alpha / undecided as f64;
    let (h, n) = (hits as u64, trials as u64);
    Ok(if upper_tail_half(h, n) < level {
        Decision::Confirm
    } else if lower_tail_half(h, n) < level {
        Decision::Reject
    } else {
        Decision::Undecided
    })
}

/// Runs Boruta on every non-shadow attribute of `data`.
///
/// Each iteration shadows the attributes that are still undecided or already
/// confirmed, trains a forest, and scores a hit for each undecided attribute
/// whose z-score beats the best shadow. Rejected attributes leave the training
/// data. Attributes still undecided after `max_runs` iterations are Tentative.
pub fn run_boruta(data: &Dataset, config: &BorutaConfig) -> Result<SelectionResult> {
    config.validate()?;
    if data.n_objects() == 0 || data.n_attributes() == 0 {
        return Err(Error::EmptyDataset);
    }
    if let Some(m) = data.meta().iter().find(|m| m.origin == Origin::Shadow) {
        return Err(Error::InvalidInput(format!(
            "attribute '{}' is already a shadow; Boruta adds its own",
            m.name
        )));
    }

    let p = data.n_attributes();
    let mut status: Vec<Option<SelectionStatus>> = vec![None; p];
    let mut decided_at: Vec<Option<usize>> = vec![None; p];
    let mut hits = vec![0usize; p];
    let mut tally = ImportanceTally::new(p);
    let mut history = Vec::new();
    let mut iterations = 0;

    for iteration in 1..=config.max_runs {
        if status.iter().all(Option::is_some) {
            break;
        }
        let active: Vec<usize> = (0..p)
            .filter(|&j| status[j] != Some(SelectionStatus::Rejected))
            .collect();
        let extended = add_shadow_attributes(
            &data.select(&active)?,
            rng::derive_seed(config.seed, &[iteration as u64, TAG_SHADOW]),
        )?;
        let forest_cfg = ForestConfig {
            seed: rng::derive_seed(config.seed, &[iteration as u64, TAG_FOREST]),
            ..config.forest.clone()
        };
        let forest = train_forest(&extended, &forest_cfg)?;
        let report = permutation_importance(
            &forest,
            &extended,
            rng::derive_seed(config.seed, &[iteration as u64, TAG_IMPORTANCE]),
        )?;
        iterations = iteration;

        let shadow_max = (active.len()..extended.n_attributes())
            .map(|j| report.attributes[j].z_score)
            .fold(f64::NEG_INFINITY, f64::max);

        let mut z_scores = vec![None; p];
        let mut raw = vec![None; p];
        for (k, &j) in active.iter().enumerate() {
            let imp = report.attributes[k];
            z_scores[j] = Some(imp.z_score);
            raw[j] = Some(imp.raw);
            tally.add(j, imp.z_score, imp.raw);
        }
        let undecided: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&j| status[j].is_none())
            .collect();
        let z: Vec<f64> = undecided.iter().map(|&j| z_scores[j].unwrap()).collect();
        for (&j, hit) in undecided.iter().zip(hit_test(&z, shadow_max)) {
            hits[j] += hit as usize;
        }
        history.push(IterationRecord {
            iteration,
            stage: None,
            shadow_threshold: shadow_max,
            z_scores,
            raw,
        });

        if iteration >= FIRST_DECISION_ITERATION {
            for &j in &undecided {
                match binomial_decision(hits[j], iteration, config.alpha, undecided.len())? {
                    Decision::Confirm => status[j] = Some(SelectionStatus::Confirmed),
                    Decision::Reject => status[j] = Some(SelectionStatus::Rejected),
                    Decision::Undecided => continue,
                }
                decided_at[j] = Some(iteration);
            }
        }
    }

    let attributes = (0..p)
        .map(|j| {
            let (mean_importance, mean_raw_importance) = tally.means(j);
            AttributeDecision {
                name: data.name(j).to_string(),
                index: j,
                status: status[j].unwrap_or(SelectionStatus::Tentative),
                hit_count: hits[j],
                decided_at: decided_at[j],
                mean_importance,
                mean_raw_importance,
            }
        })
        .collect();
    Ok(SelectionResult {
        attributes,
        iterations_run: iterations,
        history,
        config: RunConfig::Boruta(config.clone()),
        budget_exhausted: false,
    })
}
