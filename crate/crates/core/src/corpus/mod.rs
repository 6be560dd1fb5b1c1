//! Requirement records, labeled pairs, dataset splits and synthetic corpora.

mod label;
mod pairs;
mod records;
mod split;
mod synth;

pub mod fetch;

pub use label::{DependencyLabel, LabelScheme};
pub use pairs::{
    build_pairs, filter_and_binarize, read_pairs, read_pairs_path, write_pairs, PairBuild,
    RequirementPair,
};
pub use records::{load_records, load_records_path, write_records, RequirementRecord};
pub use split::{apportion, balance_and_split, stratified_split, DatasetSplit};
pub use synth::{synth_corpus, SynthConfig};
