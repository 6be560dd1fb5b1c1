use crate::corpus::DependencyLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("schema error: missing required column `{0}`")]
    MissingColumn(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("no dependent pairs could be derived from the records")]
    EmptyCorpus,

    #[error("class {0} has no members")]
    MissingClass(DependencyLabel),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: model expects {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("training set contains a single class; at least two are required")]
    SingleClass,

    #[error("class {class} has {count} samples, fewer than k={k} folds; use a smaller k")]
    FoldMissingClass {
        class: usize,
        count: usize,
        k: usize,
    },

    #[error("vocabulary is empty after applying min_df={0}")]
    EmptyVocabulary(usize),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("transport error: {0}")]
    Transport(String),
}
