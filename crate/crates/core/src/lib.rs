//! All-relevant feature selection built on a random-forest importance source.
//!
//! The crate is organised bottom-up:
//!
//! * [`dataset`] holds the column-oriented attribute matrix and its metadata.
//! * [`forest`] trains classification forests and measures permutation
//!   importance on out-of-bag objects.
//! * [`contrast`] builds artificial attributes (shadows, noise, permuted copies).
//! * [`boruta`] and [`ace`] are the two all-relevant wrappers.
//! * [`datagen`] produces the synthetic XOR benchmark sets.
//! * [`bench`] scores selections and runs the benchmark experiments.

pub mod ace;
pub mod bench;
pub mod boruta;
pub mod contrast;
pub mod datagen;
pub mod dataset;
mod error;
pub mod forest;
pub mod rng;
pub mod selection;
pub mod stats;

pub use error::{Error, Result};

pub use ace::{ace_stage, run_ace, AceConfig};
pub use boruta::{binomial_decision, hit_test, run_boruta, BorutaConfig, Decision};
pub use dataset::{AttributeMeta, Dataset, Origin};
pub use forest::{
    oob_error, permutation_importance, predict, train_forest, AttributeImportance, Forest,
    ForestConfig, ImportanceReport,
};
pub use selection::{AttributeDecision, IterationRecord, SelectionResult, SelectionStatus};
