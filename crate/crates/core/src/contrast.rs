//! Artificial attributes: shadows, uniform noise and permuted copies.
//!
//! All three keep the existing columns untouched and append new ones tagged
//! with a non-`Original` origin.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataset::{AttributeMeta, Dataset, Origin};
use crate::{rng, Error, Result};

/// Shadows are padded up to this count on narrow datasets.
pub const MIN_SHADOWS: usize = 5;

fn unique_name(taken: &mut HashSet<String>, base: String) -> String {
    if taken.insert(base.clone()) {
        return base;
    }
    (2..)
        .map(|k| format!("{base}~{k}"))
        .find(|n| taken.insert(n.clone()))
        .expect("unbounded search")
}

fn permuted<R: Rng>(col: &[f64], rng: &mut R) -> Vec<f64> {
    let mut out = col.to_vec();
    out.shuffle(rng);
    out
}

/// Appends one independently shuffled copy of every non-shadow attribute,
/// plus extra shadows of cyclically chosen attributes until there are at
/// least [`MIN_SHADOWS`].
pub fn add_shadow_attributes(data: &Dataset, seed: u64) -> Result<Dataset> {
    let sources: Vec<usize> = (0..data.n_attributes())
        .filter(|&j| data.meta()[j].origin != Origin::Shadow)
        .collect();
    if data.n_objects() == 0 || sources.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let count = sources.len().max(MIN_SHADOWS);
    let mut rng = rng::seeded(seed);
    let mut taken: HashSet<String> = data.meta().iter().map(|m| m.name.clone()).collect();
    let mut cols = Vec::with_capacity(count);
    let mut meta = Vec::with_capacity(count);
    for k in 0..count {
        let src = sources[k % sources.len()];
        let round = k / sources.len();
        let base = if round == 0 {
            format!("shadow_{}", data.name(src))
        } else {
            format!("shadow{}_{}", round + 1, data.name(src))
        };
        cols.push(permuted(data.column(src), &mut rng));
        meta.push(AttributeMeta {
            name: unique_name(&mut taken, base),
            origin: Origin::Shadow,
            relevant: Some(false),
            source: Some(src),
        });
    }
    data.with_appended(cols, meta)
}

/// Appends i.i.d. uniform `[0, 1)` columns until the dataset has
/// `target_total` attributes.
pub fn add_noise_attributes(data: &Dataset, target_total: usize, seed: u64) -> Result<Dataset> {
    let have = data.n_attributes();
    if target_total < have {
        return Err(Error::InvalidInput(format!(
            "target of {target_total} attributes is below the current {have}"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut taken: HashSet<String> = data.meta().iter().map(|m| m.name.clone()).collect();
    let n = data.n_objects();
    let extra = target_total - have;
    let mut cols = Vec::with_capacity(extra);
    let mut meta = Vec::with_capacity(extra);
    for k in 0..extra {
        cols.push((0..n).map(|_| rng.gen::<f64>()).collect());
        meta.push(AttributeMeta {
            name: unique_name(&mut taken, format!("noise{}", k + 1)),
            origin: Origin::Noise,
            relevant: Some(false),
            source: None,
        });
    }
    data.with_appended(cols, meta)
}

/// Samples `count` original attributes with replacement and appends an
/// independently permuted copy of each.
pub fn add_permuted_copies(data: &Dataset, count: usize, seed: u64) -> Result<Dataset> {
    let originals = data.indices_with_origin(Origin::Original);
    if data.n_objects() == 0 || originals.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if count == 0 {
        return Err(Error::InvalidInput("permuted copy count must be >= 1".into()));
    }
    let mut rng = rng::seeded(seed);
    let mut taken: HashSet<String> = data.meta().iter().map(|m| m.name.clone()).collect();
    let mut cols = Vec::with_capacity(count);
    let mut meta = Vec::with_capacity(count);
    for k in 0..count {
        let src = originals[rng.gen_range(0..originals.len())];
        cols.push(permuted(data.column(src), &mut rng));
        meta.push(AttributeMeta {
            name: unique_name(&mut taken, format!("permuted{}_{}", k + 1, data.name(src))),
            origin: Origin::PermutedCopy,
            relevant: Some(false),
            source: Some(src),
        });
    }
    data.with_appended(cols, meta)
}
