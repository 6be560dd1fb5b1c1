//! From-scratch learners, evaluation and cross-validated tuning.

mod cv;
mod data;
mod forest;
mod metrics;
mod nb;
mod spec;

pub use cv::{cross_validate_tune, stratified_folds, TuneResult};
pub use data::Dataset;
pub use forest::{DecisionTree, RandomForest};
pub use metrics::{ClassMetrics, ClassProbabilities, EvalMetrics};
pub use nb::MultinomialNb;
pub use spec::{default_grid, MaxFeatures, ModelKind, ModelSpec};

use serde::{Deserialize, Serialize};

use crate::textprep::FeatureVector;
use crate::{Error, Result};

/// A trained learner of either kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Model {
    NaiveBayes(MultinomialNb),
    RandomForest(RandomForest),
}

impl Model {
    pub fn n_classes(&self) -> usize {
        match self {
            Model::NaiveBayes(m) => m.n_classes(),
            Model::RandomForest(m) => m.n_classes(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::NaiveBayes(m) => m.dim(),
            Model::RandomForest(m) => m.dim(),
        }
    }
}

pub fn train_nb(data: &Dataset, alpha: f64) -> Result<Model> {
    MultinomialNb::fit(data, alpha).map(Model::NaiveBayes)
}

pub fn train_rf(data: &Dataset, spec: &ModelSpec) -> Result<Model> {
    RandomForest::fit(data, spec).map(Model::RandomForest)
}

/// Trains whichever learner `spec` names.
pub fn train(data: &Dataset, spec: &ModelSpec) -> Result<Model> {
    spec.validate()?;
    match spec.kind {
        ModelKind::NaiveBayes => train_nb(data, spec.nb_alpha),
        ModelKind::RandomForest => train_rf(data, spec),
    }
}

pub fn predict_proba(model: &Model, x: &FeatureVector) -> Result<ClassProbabilities> {
    match model {
        Model::NaiveBayes(m) => m.predict_proba(x),
        Model::RandomForest(m) => m.predict_proba(x),
    }
}

/// Argmax class; ties go to the lowest class index.
pub fn predict(model: &Model, x: &FeatureVector) -> Result<usize> {
    predict_proba(model, x).map(|p| p.argmax())
}

pub fn evaluate(model: &Model, test: &Dataset) -> Result<EvalMetrics> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    if test.n_classes() != model.n_classes() {
        return Err(Error::InvalidArgument(format!(
            "test set has {} classes, model {}",
            test.n_classes(),
            model.n_classes()
        )));
    }
    let predicted = test
        .x()
        .iter()
        .map(|x| predict(model, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalMetrics::from_predictions(
        test.y(),
        &predicted,
        test.n_classes(),
    ))
}
