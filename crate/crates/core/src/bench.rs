//! Selection scoring and the three benchmark experiments: the synthetic XOR
//! grid, noise-extended real sets, and the forest-size sweep with a
//! permuted-copy control.
//!
//! Every experiment returns one [`BenchmarkRecord`] per (cell, repetition,
//! algorithm); summaries are always recomputed from the stored records.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ace::{run_ace, AceConfig};
use crate::boruta::{run_boruta, BorutaConfig};
use crate::contrast::add_permuted_copies;
use crate::datagen::{extend_real_set, generate_xor_set, XOR_RELEVANT};
use crate::dataset::Dataset;
use crate::forest::{permutation_importance, train_forest, ForestConfig, ImportanceReport};
use crate::selection::{SelectionResult, SelectionStatus};
use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

impl ConfusionCounts {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if a + b == 0 { 0.0 } else { a as f64 / (a + b) as f64 };
        let precision = ratio(tp, fp);
        let recall = ratio(tp, fn_);
        let f_score = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ConfusionCounts {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f_score,
        }
    }
}

/// Confusion counts of `selected` against `truth`. Both must lie in `universe`.
pub fn score_selection<T: Ord + Clone + std::fmt::Debug>(
    selected: &[T],
    truth: &[T],
    universe: &[T],
) -> Result<ConfusionCounts> {
    let universe: BTreeSet<&T> = universe.iter().collect();
    if let Some(x) = selected.iter().chain(truth).find(|x| !universe.contains(x)) {
        return Err(Error::InvalidInput(format!(
            "attribute {x:?} is not in the universe"
        )));
    }
    let selected: BTreeSet<&T> = selected.iter().collect();
    let truth: BTreeSet<&T> = truth.iter().collect();
    let tp = selected.intersection(&truth).count();
    Ok(ConfusionCounts::from_counts(
        tp,
        selected.len() - tp,
        truth.len() - tp,
    ))
}

/// The `n` attributes with the highest z-score, ties to the lower index.
/// Returned in ascending index order.
pub fn top_n_reference(report: &ImportanceReport, n: usize) -> Result<Vec<usize>> {
    if n > report.len() {
        return Err(Error::InvalidInput(format!(
            "cannot take top {n} of {} attributes",
            report.len()
        )));
    }
    let mut order: Vec<usize> = (0..report.len()).collect();
    order.sort_by(|&a, &b| {
        report.attributes[b]
            .z_score
            .total_cmp(&report.attributes[a].z_score)
            .then(a.cmp(&b))
    });
    order.truncate(n);
    order.sort_unstable();
    Ok(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    Top,
    Boruta,
    Ace,
}

impl Algorithm {
    fn tag(self) -> u64 {
        match self {
            Algorithm::Top => 101,
            Algorithm::Boruta => 102,
            Algorithm::Ace => 103,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Experiment {
    SyntheticGrid,
    SemiSynthetic,
    TreeSweep,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellParams {
    pub n_objects: usize,
    pub n_attributes: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub base_set: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub num_trees: Option<usize>,
    #[serde(default)]
    pub control: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub experiment: Experiment,
    pub cell: CellParams,
    pub algorithm: Algorithm,
    pub repetition: usize,
    pub seed: u64,
    /// Against design relevance (grid) or the base-set selection (semi-synthetic);
    /// absent when no reference exists.
    pub counts: Option<ConfusionCounts>,
    pub selected: Vec<String>,
    pub tentative: Vec<String>,
    pub confirmed_count: usize,
    /// Artificial (noise or permuted-copy) attributes selected.
    pub certain_false_positives: Option<usize>,
    /// Attributes selected on the base set that were selected again.
    pub retained_originals: Option<usize>,
    pub baseline_confirmed: Option<usize>,
    pub noise_distribution: Option<String>,
    /// Hardware dependent, so kept out of serialized records.
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

/// Algorithm settings shared by all experiment cells. Seeds inside these
/// configs are ignored; each cell derives its own.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchSettings {
    pub boruta: BorutaConfig,
    pub ace: AceConfig,
    /// Forest used by the Top-N reference.
    pub top_forest: ForestConfig,
}


struct Selection {
    confirmed: Vec<usize>,
    tentative: Vec<usize>,
}

impl From<&SelectionResult> for Selection {
    fn from(r: &SelectionResult) -> Self {
        Selection {
            confirmed: r.confirmed_indices(),
            tentative: r
                .with_status(SelectionStatus::Tentative)
                .into_iter()
                .map(|a| a.index)
                .collect(),
        }
    }
}

fn run_algorithm(
    algorithm: Algorithm,
    data: &Dataset,
    top_n: usize,
    seed: u64,
    settings: &BenchSettings,
) -> Result<(Selection, f64)> {
    let start = Instant::now();
    let selection = match algorithm {
        Algorithm::Top => {
            let cfg = ForestConfig {
                seed: rng::derive_seed(seed, &[1]),
                ..settings.top_forest.clone()
            };
            let forest = train_forest(data, &cfg)?;
            let report = permutation_importance(&forest, data, rng::derive_seed(seed, &[2]))?;
            Selection {
                confirmed: top_n_reference(&report, top_n)?,
                tentative: Vec::new(),
            }
        }
        Algorithm::Boruta => {
            let cfg = BorutaConfig {
                seed,
                ..settings.boruta.clone()
            };
            Selection::from(&run_boruta(data, &cfg)?)
        }
        Algorithm::Ace => {
            let cfg = AceConfig {
                seed,
                ..settings.ace.clone()
            };
            Selection::from(&run_ace(data, &cfg)?)
        }
    };
    Ok((selection, start.elapsed().as_secs_f64()))
}

fn names(data: &Dataset, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&j| data.name(j).to_string()).collect()
}

fn artificial_count(data: &Dataset, idx: &[usize]) -> usize {
    idx.iter()
        .filter(|&&j| data.meta()[j].origin.is_artificial())
        .count()
}

/// Synthetic XOR grid: for each cell and repetition, generate a set and run
/// every algorithm, scoring against design relevance. Top selects
/// [`XOR_RELEVANT`] attributes.
pub fn run_synthetic_grid(
    cells: &[(usize, usize)],
    algorithms: &[Algorithm],
    repetitions: usize,
    seed: u64,
    settings: &BenchSettings,
) -> Result<Vec<BenchmarkRecord>> {
    if algorithms.is_empty() {
        return Err(Error::InvalidInput("no algorithms requested".into()));
    }
    let jobs: Vec<(usize, usize, usize, Algorithm)> = cells
        .iter()
        .flat_map(|&(n, p)| {
            (0..repetitions).flat_map(move |rep| algorithms.iter().map(move |&a| (n, p, rep, a)))
        })
        .collect();
    jobs.into_par_iter()
        .map(|(n, p, rep, algorithm)| {
            let data_seed = rng::derive_seed(seed, &[n as u64, p as u64, rep as u64]);
            let data = generate_xor_set(n, p, data_seed)?;
            let truth: Vec<usize> = (0..p)
                .filter(|&j| data.meta()[j].relevant == Some(true))
                .collect();
            let universe: Vec<usize> = (0..p).collect();
            let (sel, secs) = run_algorithm(
                algorithm,
                &data,
                XOR_RELEVANT,
                rng::derive_seed(data_seed, &[algorithm.tag()]),
                settings,
            )?;
            Ok(BenchmarkRecord {
                experiment: Experiment::SyntheticGrid,
                cell: CellParams {
                    n_objects: n,
                    n_attributes: p,
                    base_set: None,
                    num_trees: None,
                    control: false,
                },
                algorithm,
                repetition: rep,
                seed: data_seed,
                counts: Some(score_selection(&sel.confirmed, &truth, &universe)?),
                selected: names(&data, &sel.confirmed),
                tentative: names(&data, &sel.tentative),
                confirmed_count: sel.confirmed.len(),
                certain_false_positives: None,
                retained_originals: None,
                baseline_confirmed: None,
                noise_distribution: None,
                wall_clock_seconds: secs,
            })
        })
        .collect()
}

/// Semi-synthetic families: per repetition, Boruta on the base set gives the
/// reference selection; each noise-extended copy is then scored for retained
/// base selections and selected noise columns.
pub fn run_semisynthetic(
    base: &Dataset,
    base_name: &str,
    target_totals: &[usize],
    repetitions: usize,
    seed: u64,
    settings: &BenchSettings,
) -> Result<Vec<BenchmarkRecord>> {
    let per_rep: Vec<Vec<BenchmarkRecord>> = (0..repetitions)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = rng::derive_seed(seed, &[rep as u64]);
            let boruta_seed = rng::derive_seed(rep_seed, &[Algorithm::Boruta.tag()]);
            let (base_sel, _) =
                run_algorithm(Algorithm::Boruta, base, 0, boruta_seed, settings)?;
            let base_confirmed = names(base, &base_sel.confirmed);
            let extended = extend_real_set(base, target_totals, rep_seed)?;
            extended
                .par_iter()
                .zip(target_totals.par_iter())
                .map(|(data, &total)| {
                    let (sel, secs) =
                        run_algorithm(Algorithm::Boruta, data, 0, boruta_seed, settings)?;
                    let selected = names(data, &sel.confirmed);
                    let universe: Vec<String> =
                        data.meta().iter().map(|m| m.name.clone()).collect();
                    let counts = score_selection(&selected, &base_confirmed, &universe)?;
                    Ok(BenchmarkRecord {
                        experiment: Experiment::SemiSynthetic,
                        cell: CellParams {
                            n_objects: data.n_objects(),
                            n_attributes: total,
                            base_set: Some(base_name.to_string()),
                            num_trees: None,
                            control: false,
                        },
                        algorithm: Algorithm::Boruta,
                        repetition: rep,
                        seed: rep_seed,
                        retained_originals: Some(counts.tp),
                        counts: Some(counts),
                        certain_false_positives: Some(artificial_count(data, &sel.confirmed)),
                        baseline_confirmed: Some(base_confirmed.len()),
                        selected,
                        tentative: names(data, &sel.tentative),
                        confirmed_count: sel.confirmed.len(),
                        noise_distribution: Some("uniform[0,1)".into()),
                        wall_clock_seconds: secs,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    // order: total-major, repetition-minor
    let mut records: Vec<BenchmarkRecord> = per_rep.into_iter().flatten().collect();
    records.sort_by_key(|r| {
        let pos = target_totals.iter().position(|&t| t == r.cell.n_attributes);
        (pos, r.repetition)
    });
    Ok(records)
}

/// Boruta with increasing forest sizes. With `control = Some(k)`, each run is
/// repeated on the data extended with `k` permuted copies and the selected
/// copies are counted as certain false positives.
pub fn run_tree_sweep(
    data: &Dataset,
    tree_counts: &[usize],
    repetitions: usize,
    control: Option<usize>,
    seed: u64,
    settings: &BenchSettings,
) -> Result<Vec<BenchmarkRecord>> {
    if tree_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("tree counts must be strictly ascending".into()));
    }
    let variants: Vec<bool> = match control {
        Some(_) => vec![false, true],
        None => vec![false],
    };
    let jobs: Vec<(usize, usize, bool)> = tree_counts
        .iter()
        .flat_map(|&t| {
            let variants = &variants;
            (0..repetitions).flat_map(move |rep| variants.iter().map(move |&c| (t, rep, c)))
        })
        .collect();
    jobs.into_par_iter()
        .map(|(num_trees, rep, is_control)| {
            let rep_seed = rng::derive_seed(seed, &[num_trees as u64, rep as u64]);
            let owned;
            let target = if is_control {
                let k = control.expect("control variant implies a count");
                owned = add_permuted_copies(data, k, rng::derive_seed(rep_seed, &[7]))?;
                &owned
            } else {
                data
            };
            let mut sweep_settings = settings.clone();
            sweep_settings.boruta.forest.num_trees = num_trees;
            let (sel, secs) = run_algorithm(
                Algorithm::Boruta,
                target,
                0,
                rng::derive_seed(rep_seed, &[Algorithm::Boruta.tag()]),
                &sweep_settings,
            )?;
            Ok(BenchmarkRecord {
                experiment: Experiment::TreeSweep,
                cell: CellParams {
                    n_objects: target.n_objects(),
                    n_attributes: target.n_attributes(),
                    base_set: None,
                    num_trees: Some(num_trees),
                    control: is_control,
                },
                algorithm: Algorithm::Boruta,
                repetition: rep,
                seed: rep_seed,
                counts: None,
                selected: names(target, &sel.confirmed),
                tentative: names(target, &sel.tentative),
                confirmed_count: sel.confirmed.len(),
                certain_false_positives: is_control
                    .then(|| artificial_count(target, &sel.confirmed)),
                retained_originals: None,
                baseline_confirmed: None,
                noise_distribution: None,
                wall_clock_seconds: secs,
            })
        })
        .collect()
}

/// Means over repetitions for one (experiment, cell, algorithm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: Experiment,
    pub cell: CellParams,
    pub algorithm: Algorithm,
    pub repetitions: usize,
    pub mean_tp: Option<f64>,
    pub mean_fp: Option<f64>,
    pub mean_fn: Option<f64>,
    pub mean_f: Option<f64>,
    pub sd_f: Option<f64>,
    pub mean_confirmed: f64,
    pub mean_certain_fp: Option<f64>,
    pub mean_retained: Option<f64>,
    #[serde(skip)]
    pub mean_seconds: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn mean_of(records: &[&BenchmarkRecord], f: impl Fn(&BenchmarkRecord) -> Option<f64>) -> Option<f64> {
    let xs: Option<Vec<f64>> = records.iter().map(|r| f(r)).collect();
    xs.filter(|v| !v.is_empty()).map(|v| mean(&v))
}

/// Groups records by (experiment, cell, algorithm) in order of first appearance.
pub fn summarize(records: &[BenchmarkRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Experiment, CellParams, Algorithm)> = Vec::new();
    for r in records {
        let key = (r.experiment, r.cell.clone(), r.algorithm);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(experiment, cell, algorithm)| {
            let group: Vec<&BenchmarkRecord> = records
                .iter()
                .filter(|r| r.experiment == experiment && r.cell == cell && r.algorithm == algorithm)
                .collect();
            let fs: Option<Vec<f64>> = group.iter().map(|r| r.counts.map(|c| c.f_score)).collect();
            SummaryRow {
                experiment,
                algorithm,
                repetitions: group.len(),
                mean_tp: mean_of(&group, |r| r.counts.map(|c| c.tp as f64)),
                mean_fp: mean_of(&group, |r| r.counts.map(|c| c.fp as f64)),
                mean_fn: mean_of(&group, |r| r.counts.map(|c| c.fn_ as f64)),
                mean_f: fs.as_deref().map(mean),
                sd_f: fs.as_deref().map(sd),
                mean_confirmed: mean(
                    &group.iter().map(|r| r.confirmed_count as f64).collect::<Vec<_>>(),
                ),
                mean_certain_fp: mean_of(&group, |r| r.certain_false_positives.map(|x| x as f64)),
                mean_retained: mean_of(&group, |r| r.retained_originals.map(|x| x as f64)),
                mean_seconds: mean(
                    &group.iter().map(|r| r.wall_clock_seconds).collect::<Vec<_>>(),
                ),
                cell,
            }
        })
        .collect()
}

/// (cell, Top F, Boruta F, ACE F)
pub type DifficultyRow = (CellParams, Option<f64>, Option<f64>, Option<f64>);

/// Grid cells ordered from easiest to hardest: by Top F-score, then by Boruta
/// F-score, both descending. Each entry is (cell, Top F, Boruta F, ACE F).
pub fn difficulty_ranking(
    summary: &[SummaryRow],
) -> Vec<DifficultyRow> {
    let mut cells: Vec<CellParams> = Vec::new();
    for row in summary.iter().filter(|r| r.experiment == Experiment::SyntheticGrid) {
        if !cells.contains(&row.cell) {
            cells.push(row.cell.clone());
        }
    }
    let f_of = |cell: &CellParams, a: Algorithm| {
        summary
            .iter()
            .find(|r| r.experiment == Experiment::SyntheticGrid && &r.cell == cell && r.algorithm == a)
            .and_then(|r| r.mean_f)
    };
    let mut rows: Vec<_> = cells
        .into_iter()
        .map(|c| {
            let t = f_of(&c, Algorithm::Top);
            let b = f_of(&c, Algorithm::Boruta);
            let a = f_of(&c, Algorithm::Ace);
            (c, t, b, a)
        })
        .collect();
    let key = |x: Option<f64>| x.unwrap_or(f64::NEG_INFINITY);
    rows.sort_by(|x, y| {
        key(y.1)
            .total_cmp(&key(x.1))
            .then(key(y.2).total_cmp(&key(x.2)))
    });
    rows
}
