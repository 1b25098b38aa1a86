use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Forest;
use crate::dataset::Dataset;
use crate::{rng, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttributeImportance {
    /// Mean decrease of OOB accuracy over the trees using the attribute.
    pub raw: f64,
    /// Mean decrease over all trees with an OOB set (non-using trees
    /// contributing exactly 0), divided by its standard error.
    pub z_score: f64,
    pub using_trees: usize,
    /// Set when the standard error is undefined or zero, in which case
    /// `z_score` is reported as 0.
    pub z_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub attributes: Vec<AttributeImportance>,
}

impl ImportanceReport {
    pub fn z_scores(&self) -> Vec<f64> {
        self.attributes.iter().map(|a| a.z_score).collect()
    }

    pub fn raw(&self) -> Vec<f64> {
        self.attributes.iter().map(|a| a.raw).collect()
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }
}

/// Mean-decrease-accuracy importance computed only over the trees that split
/// on each attribute.
///
/// For tree `t` and attribute `j` used by `t`, the values of `j` are permuted
/// among the tree's OOB objects and the drop in the tree's OOB accuracy is
/// recorded. Only objects whose original path tests `j` can change their
/// prediction, so only those are re-evaluated. Trees with an empty OOB set
/// contribute nothing.
///
/// The z-score takes its standard error over every scored tree rather than
/// over the using trees alone: an attribute picked by two trees with similar
/// decreases would otherwise get an arbitrarily large z-score.
pub fn permutation_importance(
    forest: &Forest,
    data: &Dataset,
    seed: u64,
) -> Result<ImportanceReport> {
    forest.check_shape(data)?;
    let per_tree: Vec<Vec<(usize, f64)>> = (0..forest.trees.len())
        .into_par_iter()
        .map(|t| tree_decreases(forest, data, t, seed))
        .collect();

    let p = data.n_attributes();
    let mut sum = vec![0.0f64; p];
    let mut sum_sq = vec![0.0f64; p];
    let mut count = vec![0usize; p];
    for tree in &per_tree {
        for &(j, d) in tree {
            sum[j] += d;
            sum_sq[j] += d * d;
            count[j] += 1;
        }
    }
    // trees with an OOB set; for those not using j the decrease is exactly 0
    let scored = (0..forest.trees.len())
        .filter(|&t| forest.inbag[t].contains(&0))
        .count() as f64;

    let attributes = (0..p)
        .map(|j| {
            let k = count[j];
            if k == 0 {
                return AttributeImportance {
                    raw: 0.0,
                    z_score: 0.0,
                    using_trees: 0,
                    z_undefined: true,
                };
            }
            let raw = sum[j] / k as f64;
            if k == 1 {
                return AttributeImportance {
                    raw,
                    z_score: 0.0,
                    using_trees: 1,
                    z_undefined: true,
                };
            }
            let mean = sum[j] / scored;
            let var = ((sum_sq[j] - scored * mean * mean) / (scored - 1.0)).max(0.0);
            let se = (var / scored).sqrt();
            let (z_score, z_undefined) = if se > 0.0 && se.is_finite() {
                (mean / se, false)
            } else {
                (0.0, true)
            };
            AttributeImportance {
                raw,
                z_score,
                using_trees: k,
                z_undefined,
            }
        })
        .collect();
    Ok(ImportanceReport { attributes })
}

fn tree_decreases(forest: &Forest, data: &Dataset, t: usize, seed: u64) -> Vec<(usize, f64)> {
    let tree = &forest.trees[t];
    let oob = forest.oob_objects(t);
    if oob.is_empty() {
        return Vec::new();
    }
    let decision = data.decision();
    let correct: Vec<bool> = oob
        .iter()
        .map(|&i| tree.predict_object(data, i) == decision[i])
        .collect();

    // (attribute, oob position) for every attribute tested on the object's path.
    let mut touched: Vec<(usize, u32)> = Vec::new();
    let mut path = Vec::new();
    for (k, &i) in oob.iter().enumerate() {
        path.clear();
        tree.path_attributes(|j| data.column(j)[i], &mut path);
        path.sort_unstable();
        path.dedup();
        touched.extend(path.iter().map(|&j| (j, k as u32)));
    }
    touched.sort_unstable();

    // Only the permuted values landing on touched positions matter, so each
    // attribute draws just those: a partial Fisher-Yates shuffle of the OOB
    // positions yields the touched entries of a uniform random permutation.
    let mut rng = rng::stream(seed, t as u64);
    let mut pool: Vec<usize> = (0..oob.len()).collect();
    let n_oob = oob.len() as f64;
    let mut out = Vec::new();
    let mut cursor = 0;
    for j in tree.used_attributes() {
        let start = cursor;
        while cursor < touched.len() && touched[cursor].0 == j {
            cursor += 1;
        }
        let group = &touched[start..cursor];
        let (drawn, _) = pool.partial_shuffle(&mut rng, group.len());
        let col = data.column(j);
        let mut lost = 0i64;
        for (&src, &(_, k)) in drawn.iter().zip(group) {
            let i = oob[k as usize];
            let swapped = col[oob[src]];
            let pred = tree.predict_by(|a| if a == j { swapped } else { data.column(a)[i] });
            lost += correct[k as usize] as i64 - (pred == decision[i]) as i64;
        }
        out.push((j, lost as f64 / n_oob));
    }
    out
}
