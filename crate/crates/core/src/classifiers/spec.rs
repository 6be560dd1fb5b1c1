use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "NB")]
    NaiveBayes,
    #[serde(rename = "RF")]
    RandomForest,
}

impl ModelKind {
    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "NB",
            ModelKind::RandomForest => "RF",
        }
    }
}

/// Candidate features examined per split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Fixed(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Fixed(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

/// Hyper-parameters of one learner. Fields of the other kind are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub nb_alpha: f64,
    pub rf_n_trees: usize,
    /// `None` grows trees until leaves are pure.
    pub rf_max_depth: Option<usize>,
    pub rf_min_samples_split: usize,
    pub rf_max_features: MaxFeatures,
    pub seed: u64,
}

impl ModelSpec {
    pub fn naive_bayes(alpha: f64) -> Self {
        ModelSpec {
            kind: ModelKind::NaiveBayes,
            nb_alpha: alpha,
            ..Self::random_forest(100)
        }
    }

    pub fn random_forest(n_trees: usize) -> Self {
        ModelSpec {
            kind: ModelKind::RandomForest,
            nb_alpha: 1.0,
            rf_n_trees: n_trees,
            rf_max_depth: None,
            rf_min_samples_split: 2,
            rf_max_features: MaxFeatures::Sqrt,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_depth(mut self, depth: Option<usize>) -> Self {
        self.rf_max_depth = depth;
        self
    }

    pub fn with_max_features(mut self, rule: MaxFeatures) -> Self {
        self.rf_max_features = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ModelKind::NaiveBayes => {
                if !(self.nb_alpha.is_finite() && self.nb_alpha > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "nb_alpha must be positive, got {}",
                        self.nb_alpha
                    )));
                }
            }
            ModelKind::RandomForest => {
                if self.rf_n_trees == 0 {
                    return Err(Error::InvalidArgument("rf_n_trees must be positive".into()));
                }
                if self.rf_max_depth == Some(0) {
                    return Err(Error::InvalidArgument(
                        "rf_max_depth must be positive".into(),
                    ));
                }
                if self.rf_min_samples_split < 2 {
                    return Err(Error::InvalidArgument(
                        "rf_min_samples_split must be at least 2".into(),
                    ));
                }
                if self.rf_max_features == MaxFeatures::Fixed(0) {
                    return Err(Error::InvalidArgument(
                        "rf_max_features must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Default tuning grids: alpha in {0.1, 0.5, 1.0}; trees in {50, 100} by
/// depth in {8, unlimited}, sqrt features.
pub fn default_grid(kind: ModelKind, seed: u64) -> Vec<ModelSpec> {
    match kind {
        ModelKind::NaiveBayes => [0.1, 0.5, 1.0]
            .iter()
            .map(|&a| ModelSpec::naive_bayes(a).with_seed(seed))
            .collect(),
        ModelKind::RandomForest => [50, 100]
            .iter()
            .flat_map(|&n| {
                [Some(8), None].into_iter().map(move |d| {
                    ModelSpec::random_forest(n)
                        .with_max_depth(d)
                        .with_seed(seed)
                })
            })
            .collect(),
    }
}
