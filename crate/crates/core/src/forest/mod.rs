//! Random-forest classifier with out-of-bag error and permutation importance.
//!
//! Each tree is grown on its own bootstrap sample, choosing at every node the
//! best Gini split among `mtry` randomly sampled attributes. All randomness of
//! tree `t` comes from stream `t` of the forest seed, so training in parallel
//! gives exactly the same forest as training serially.

mod importance;
mod tree;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::rng;
use crate::{Error, Result};

pub use importance::{permutation_importance, AttributeImportance, ImportanceReport};
pub use tree::{Node, Tree};

use tree::{grow_tree, GrowParams, RankedColumns, MAX_CLASSES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub num_trees: usize,
    /// Attributes sampled per split; `None` means `floor(sqrt(nAttributes))`.
    pub mtry: Option<usize>,
    /// Minimum (bootstrap-weighted) number of objects in each child of a split.
    pub min_node_size: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            num_trees: 500,
            mtry: None,
            min_node_size: 1,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn with_trees(num_trees: usize) -> Self {
        ForestConfig {
            num_trees,
            ..Default::default()
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn mtry(mut self, mtry: usize) -> Self {
        self.mtry = Some(mtry);
        self
    }

    /// The `mtry` actually used for a dataset with `n_attributes` columns.
    pub fn resolve_mtry(&self, n_attributes: usize) -> Result<usize> {
        let m = self
            .mtry
            .unwrap_or_else(|| ((n_attributes as f64).sqrt().floor() as usize).max(1));
        if m == 0 || m > n_attributes {
            return Err(Error::InvalidConfig(format!(
                "mtry {m} outside 1..={n_attributes}"
            )));
        }
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if self.num_trees == 0 {
            return Err(Error::InvalidConfig("numTrees must be at least 1".into()));
        }
        if self.min_node_size == 0 {
            return Err(Error::InvalidConfig("minNodeSize must be at least 1".into()));
        }
        Ok(())
    }
}

/// A trained ensemble together with the bootstrap multiplicities of each tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<Tree>,
    inbag: Vec<Vec<u32>>,
    config: ForestConfig,
    mtry: usize,
    n_attributes: usize,
    class_labels: Vec<String>,
}

impl Forest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn mtry(&self) -> usize {
        self.mtry
    }

    pub fn n_attributes(&self) -> usize {
        self.n_attributes
    }

    pub fn n_objects(&self) -> usize {
        self.inbag.first().map_or(0, Vec::len)
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    /// Bootstrap multiplicity of every object for tree `t`.
    pub fn inbag(&self, t: usize) -> &[u32] {
        &self.inbag[t]
    }

    /// Objects left out of tree `t`'s bootstrap sample.
    pub fn oob_objects(&self, t: usize) -> Vec<usize> {
        self.inbag[t]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0)
            .map(|(i, _)| i)
            .collect()
    }

    fn check_shape(&self, data: &Dataset) -> Result<()> {
        if data.n_objects() != self.n_objects() || data.n_attributes() != self.n_attributes {
            return Err(Error::ShapeMismatch(format!(
                "forest trained on {}x{}, got {}x{}",
                self.n_objects(),
                self.n_attributes,
                data.n_objects(),
                data.n_attributes()
            )));
        }
        Ok(())
    }
}

pub fn train_forest(data: &Dataset, config: &ForestConfig) -> Result<Forest> {
    train_forest_weighted(data, config, None)
}

/// Like [`train_forest`], but bootstrap samples draw object `i` with
/// probability proportional to `weights[i]`.
pub fn train_forest_weighted(
    data: &Dataset,
    config: &ForestConfig,
    weights: Option<&[f64]>,
) -> Result<Forest> {
    config.validate()?;
    if data.n_objects() == 0 || data.n_attributes() == 0 {
        return Err(Error::EmptyDataset);
    }
    if data.present_classes() < 2 {
        let only = data.class_labels()[data.decision()[0] as usize].clone();
        return Err(Error::SingleClass(only));
    }
    if data.n_classes() > MAX_CLASSES {
        return Err(Error::InvalidInput(format!(
            "{} classes; at most {MAX_CLASSES} are supported",
            data.n_classes()
        )));
    }
    if data.n_objects() >= 1 << 24 {
        return Err(Error::InvalidInput("at most 2^24 - 1 objects are supported".into()));
    }
    let mtry = config.resolve_mtry(data.n_attributes())?;
    let sampler = match weights {
        None => None,
        Some(w) => {
            if w.len() != data.n_objects() {
                return Err(Error::ShapeMismatch(format!(
                    "{} object weights for {} objects",
                    w.len(),
                    data.n_objects()
                )));
            }
            Some(WeightedIndex::new(w).map_err(|e| {
                Error::InvalidInput(format!("object weights unusable: {e}"))
            })?)
        }
    };

    let ranked = RankedColumns::new(data);
    let params = GrowParams {
        mtry,
        min_node_size: config.min_node_size,
        n_classes: data.n_classes(),
    };
    let n = data.n_objects();
    let (trees, inbag): (Vec<Tree>, Vec<Vec<u32>>) = (0..config.num_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(config.seed, t as u64);
            let mut counts = vec![0u32; n];
            match &sampler {
                None => (0..n).for_each(|_| counts[rng.gen_range(0..n)] += 1),
                Some(s) => (0..n).for_each(|_| counts[s.sample(&mut rng)] += 1),
            }
            let tree = grow_tree(&ranked, data.decision(), &counts, &params, &mut rng);
            (tree, counts)
        })
        .unzip();

    Ok(Forest {
        trees,
        inbag,
        config: config.clone(),
        mtry,
        n_attributes: data.n_attributes(),
        class_labels: data.class_labels().to_vec(),
    })
}

fn vote(votes: &[u32]) -> u32 {
    let mut best = 0;
    for (c, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = c;
        }
    }
    best as u32
}

/// Majority vote over all trees; ties go to the lower class id.
pub fn predict(forest: &Forest, row: &[f64]) -> Result<u32> {
    if row.len() != forest.n_attributes {
        return Err(Error::ShapeMismatch(format!(
            "row has {} values, forest expects {}",
            row.len(),
            forest.n_attributes
        )));
    }
    let mut votes = vec![0u32; forest.class_labels.len()];
    for tree in &forest.trees {
        votes[tree.predict_row(row) as usize] += 1;
    }
    Ok(vote(&votes))
}

/// Fraction of objects misclassified by the vote of the trees for which they
/// are out-of-bag. Objects that are in-bag for every tree are skipped.
pub fn oob_error(forest: &Forest, data: &Dataset) -> Result<f64> {
    forest.check_shape(data)?;
    let n = data.n_objects();
    let k = forest.class_labels.len();
    let votes = forest
        .trees
        .par_iter()
        .zip(forest.inbag.par_iter())
        .fold(
            || vec![0u32; n * k],
            |mut acc, (tree, inbag)| {
                for i in (0..n).filter(|&i| inbag[i] == 0) {
                    acc[i * k + tree.predict_object(data, i) as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u32; n * k],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut voted = 0usize;
    let mut wrong = 0usize;
    for i in 0..n {
        let v = &votes[i * k..(i + 1) * k];
        if v.iter().all(|&c| c == 0) {
            continue;
        }
        voted += 1;
        if vote(v) != data.decision()[i] {
            wrong += 1;
        }
    }
    if voted == 0 {
        return Err(Error::InvalidInput(
            "no object is out-of-bag for any tree".into(),
        ));
    }
    Ok(wrong as f64 / voted as f64)
}
