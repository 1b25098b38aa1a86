//! ACE-style selection: replicate forests on shadow-extended data, a paired
//! sign test of each attribute against a shadow quantile, and stage-wise
//! removal of the effect of attributes found so far.
//!
//! Effect removal is done by reweighting objects rather than by fitting
//! residuals: after each productive stage a forest is trained on the found
//! attributes alone, and every object's bootstrap weight in the next stage is
//! its out-of-bag misclassification frequency under that forest (plus a
//! small floor). Objects already explained by the found attributes therefore
//! rarely enter the next stage's trees.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contrast::add_shadow_attributes;
use crate::dataset::{Dataset, Origin};
use crate::forest::{permutation_importance, train_forest, train_forest_weighted, ForestConfig};
use crate::selection::{
    AttributeDecision, ImportanceTally, IterationRecord, RunConfig, SelectionResult,
    SelectionStatus,
};
use crate::stats::sign_test_upper;
use crate::{rng, Error, Result};

const TAG_SHADOW: u64 = 11;
const TAG_FOREST: u64 = 12;
const TAG_IMPORTANCE: u64 = 13;
const TAG_EFFECT: u64 = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AceConfig {
    pub replicates: usize,
    /// Quantile of the shadow z-scores used as the per-replicate contrast.
    pub quantile: f64,
    pub alpha: f64,
    pub max_stages: usize,
    pub forest: ForestConfig,
    pub seed: u64,
    /// Weight every object keeps on top of its misclassification frequency.
    pub weight_floor: f64,
    /// Optional wall-clock budget, checked between stages. Runs cut short by
    /// it are flagged and are not reproducible.
    pub time_budget_secs: Option<f64>,
}

impl Default for AceConfig {
    fn default() -> Self {
        AceConfig {
            replicates: 20,
            quantile: 0.75,
            alpha: 0.05,
            max_stages: 10,
            forest: ForestConfig::with_trees(500),
            seed: 0,
            weight_floor: 0.05,
            time_budget_secs: None,
        }
    }
}

impl AceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::InvalidConfig("replicates must be at least 2".into()));
        }
        if !(self.quantile > 0.0 && self.quantile < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "quantile must lie in (0, 1), got {}",
                self.quantile
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.max_stages == 0 {
            return Err(Error::InvalidConfig("maxStages must be at least 1".into()));
        }
        if !(self.weight_floor >= 0.0 && self.weight_floor.is_finite()) {
            return Err(Error::InvalidConfig("weight floor must be >= 0".into()));
        }
        Ok(())
    }
}

/// Linear-interpolation sample quantile (type 7). `values` must be non-empty.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Evidence gathered by one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub found: Vec<usize>,
    /// Replicates in which each attribute beat the contrast (0 for
    /// attributes that were not candidates).
    pub positives: Vec<usize>,
    pub history: Vec<IterationRecord>,
}

/// One ACE stage with uniform object weights. Returns the indices of
/// attributes newly found relevant.
pub fn ace_stage(data: &Dataset, already_found: &[usize], config: &AceConfig) -> Result<Vec<usize>> {
    config.validate()?;
    Ok(run_stage(data, already_found, None, 1, config)?.found)
}

fn candidates(data: &Dataset, already_found: &[usize]) -> Vec<usize> {
    (0..data.n_attributes())
        .filter(|j| !already_found.contains(j))
        .collect()
}

fn run_stage(
    data: &Dataset,
    already_found: &[usize],
    weights: Option<&[f64]>,
    stage: usize,
    config: &AceConfig,
) -> Result<StageOutcome> {
    let p = data.n_attributes();
    if let Some(&j) = already_found.iter().find(|&&j| j >= p) {
        return Err(Error::InvalidInput(format!("found attribute {j} out of range")));
    }
    let cands = candidates(data, already_found);

    let replicates: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let tags = |tag: u64| rng::derive_seed(config.seed, &[stage as u64, r as u64, tag]);
            let extended = add_shadow_attributes(data, tags(TAG_SHADOW))?;
            let forest_cfg = ForestConfig {
                seed: tags(TAG_FOREST),
                ..config.forest.clone()
            };
            let forest = train_forest_weighted(&extended, &forest_cfg, weights)?;
            let report = permutation_importance(&forest, &extended, tags(TAG_IMPORTANCE))?;
            let shadows: Vec<f64> = (p..extended.n_attributes())
                .map(|j| report.attributes[j].z_score)
                .collect();
            let z = report.attributes[..p].iter().map(|a| a.z_score).collect();
            let raw = report.attributes[..p].iter().map(|a| a.raw).collect();
            Ok((z, raw, quantile(&shadows, config.quantile)))
        })
        .collect::<Result<_>>()?;

    let mut positives = vec![0usize; p];
    let mut nonzero = vec![0usize; p];
    for (z, _, threshold) in &replicates {
        for &j in &cands {
            let d = z[j] - threshold;
            positives[j] += (d > 0.0) as usize;
            nonzero[j] += (d != 0.0) as usize;
        }
    }
    let level = config.alpha / cands.len().max(1) as f64;
    let found = cands
        .iter()
        .copied()
        .filter(|&j| {
            nonzero[j] > 0 && sign_test_upper(positives[j] as u64, nonzero[j] as u64) < level
        })
        .collect();

    let history = replicates
        .into_iter()
        .enumerate()
        .map(|(r, (z, raw, threshold))| IterationRecord {
            iteration: r + 1,
            stage: Some(stage),
            shadow_threshold: threshold,
            z_scores: z.into_iter().map(Some).collect(),
            raw: raw.into_iter().map(Some).collect(),
        })
        .collect();
    Ok(StageOutcome {
        found,
        positives,
        history,
    })
}

/// Per-object weights for the next stage: OOB misclassification frequency of
/// a forest trained on the found attributes only, plus `floor`.
pub fn effect_weights(
    data: &Dataset,
    found: &[usize],
    forest: &ForestConfig,
    floor: f64,
) -> Result<Vec<f64>> {
    let sub = data.select(found)?;
    let forest = train_forest(&sub, forest)?;
    let n = data.n_objects();
    let mut wrong = vec![0u32; n];
    let mut seen = vec![0u32; n];
    for (t, tree) in forest.trees().iter().enumerate() {
        for i in forest.oob_objects(t) {
            seen[i] += 1;
            wrong[i] += (tree.predict_object(&sub, i) != sub.decision()[i]) as u32;
        }
    }
    let weights: Vec<f64> = (0..n)
        .map(|i| {
            let f = if seen[i] == 0 {
                0.0
            } else {
                wrong[i] as f64 / seen[i] as f64
            };
            f + floor
        })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        // nothing left unexplained and no floor: keep sampling uniform
        return Ok(vec![1.0; n]);
    }
    Ok(weights)
}

/// Runs ACE stages until one finds nothing new or `max_stages` is reached.
/// Found attributes are Confirmed, all others Rejected.
pub fn run_ace(data: &Dataset, config: &AceConfig) -> Result<SelectionResult> {
    config.validate()?;
    if data.n_objects() == 0 || data.n_attributes() == 0 {
        return Err(Error::EmptyDataset);
    }
    if let Some(m) = data.meta().iter().find(|m| m.origin == Origin::Shadow) {
        return Err(Error::InvalidInput(format!(
            "attribute '{}' is already a shadow; ACE adds its own",
            m.name
        )));
    }
    let p = data.n_attributes();
    let start = Instant::now();
    let budget = config.time_budget_secs.map(Duration::from_secs_f64);

    let mut found: Vec<usize> = Vec::new();
    let mut found_at = vec![None; p];
    let mut last_positives = vec![0usize; p];
    let mut tally = ImportanceTally::new(p);
    let mut history = Vec::new();
    let mut weights: Option<Vec<f64>> = None;
    let mut budget_exhausted = false;
    let mut last_stage = 0;

    for stage in 1..=config.max_stages {
        if budget.is_some_and(|b| start.elapsed() >= b) {
            budget_exhausted = true;
            break;
        }
        let outcome = run_stage(data, &found, weights.as_deref(), stage, config)?;
        last_stage = stage;
        for rec in &outcome.history {
            for j in 0..p {
                if let (Some(z), Some(raw)) = (rec.z_scores[j], rec.raw[j]) {
                    tally.add(j, z, raw);
                }
            }
        }
        for j in candidates(data, &found) {
            last_positives[j] = outcome.positives[j];
        }
        history.extend(outcome.history);
        if outcome.found.is_empty() {
            break;
        }
        for &j in &outcome.found {
            found_at[j] = Some(stage);
        }
        found.extend(outcome.found);
        found.sort_unstable();
        if stage < config.max_stages {
            let effect_cfg = ForestConfig {
                seed: rng::derive_seed(config.seed, &[stage as u64, TAG_EFFECT]),
                mtry: None,
                ..config.forest.clone()
            };
            weights = Some(effect_weights(data, &found, &effect_cfg, config.weight_floor)?);
        }
    }

    let attributes = (0..p)
        .map(|j| {
            let (mean_importance, mean_raw_importance) = tally.means(j);
            let confirmed = found_at[j].is_some();
            AttributeDecision {
                name: data.name(j).to_string(),
                index: j,
                status: if confirmed {
                    SelectionStatus::Confirmed
                } else {
                    SelectionStatus::Rejected
                },
                hit_count: last_positives[j],
                decided_at: found_at[j].or((last_stage > 0).then_some(last_stage)),
                mean_importance,
                mean_raw_importance,
            }
        })
        .collect();
    Ok(SelectionResult {
        attributes,
        iterations_run: history.len(),
        history,
        config: RunConfig::Ace(config.clone()),
        budget_exhausted,
    })
}
