//! Pool-based active learning with uncertainty sampling and a simulated
//! oracle.
//!
//! The learner sees pool feature vectors only. Labels live inside
//! [`OracleSim`] and are released one instance at a time, which is also
//! what the query counter audits.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{
    evaluate, predict_proba, train, ClassProbabilities, Dataset, Model, ModelSpec,
};
use crate::seed::{indexed_rng, stream_rng, STREAM_AL_SEED_SET};
use crate::textprep::FeatureVector;
use crate::{Error, Result};

const RANDOM_BATCH_FAMILY: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QueryStrategy {
    MinMargin,
    LeastConfidence,
    Entropy,
    /// Passive baseline: uniform sampling without replacement.
    Random,
}

impl QueryStrategy {
    pub fn name(self) -> &'static str {
        match self {
            QueryStrategy::MinMargin => "MinMargin",
            QueryStrategy::LeastConfidence => "LeastConfidence",
            QueryStrategy::Entropy => "Entropy",
            QueryStrategy::Random => "Random",
        }
    }
}

impl fmt::Display for QueryStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QueryStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "minmargin" | "margin" => Ok(QueryStrategy::MinMargin),
            "leastconfidence" | "leastconfident" => Ok(QueryStrategy::LeastConfidence),
            "entropy" => Ok(QueryStrategy::Entropy),
            "random" | "baseline" => Ok(QueryStrategy::Random),
            _ => Err(Error::InvalidArgument(format!("unknown strategy `{s}`"))),
        }
    }
}

/// Higher means more uncertain.
///
/// MinMargin is `1 - (p1 - p2)` over the two largest probabilities,
/// LeastConfidence `1 - max p`, Entropy `-sum p ln p`.
pub fn uncertainty_score(probs: &ClassProbabilities, strategy: QueryStrategy) -> Result<f64> {
    let p = probs.as_slice();
    if p.len() < 2 {
        return Err(Error::InvalidArgument(
            "uncertainty needs at least two classes".into(),
        ));
    }
    // Re-validate: the vector may have been built by a caller.
    ClassProbabilities::new(p.to_vec())?;
    match strategy {
        QueryStrategy::MinMargin => {
            let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for &v in p {
                if v > first {
                    second = first;
                    first = v;
                } else if v > second {
                    second = v;
                }
            }
            Ok(1.0 - (first - second))
        }
        QueryStrategy::LeastConfidence => {
            Ok(1.0 - p.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        }
        QueryStrategy::Entropy => Ok(-p
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| v * v.ln())
            .sum::<f64>()),
        QueryStrategy::Random => Err(Error::InvalidArgument(
            "the Random strategy has no uncertainty score".into(),
        )),
    }
}

/// Picks `k` pool ids. Uncertainty strategies take the top-k scores with
/// ties broken by ascending id; `Random` samples uniformly with `seed`.
/// `features` is indexed by id.
pub fn select_batch(
    pool: &[usize],
    features: &[FeatureVector],
    model: &Model,
    strategy: QueryStrategy,
    k: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if pool.len() < k {
        return Err(Error::InvalidArgument(format!(
            "pool has {} instances, batch needs {k}",
            pool.len()
        )));
    }
    let mut ids = pool.to_vec();
    ids.sort_unstable();
    if strategy == QueryStrategy::Random {
        let mut rng = indexed_rng(seed, RANDOM_BATCH_FAMILY, 0);
        let (chosen, _) = ids.partial_shuffle(&mut rng, k);
        let mut chosen = chosen.to_vec();
        chosen.sort_unstable();
        return Ok(chosen);
    }
    let scores = ids
        .par_iter()
        .map(|&id| uncertainty_score(&predict_proba(model, &features[id])?, strategy))
        .collect::<Result<Vec<f64>>>()?;
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(ids[a].cmp(&ids[b])));
    Ok(order[..k].iter().map(|&i| ids[i]).collect())
}

/// Ground-truth label source that counts each distinct instance it
/// reveals.
#[derive(Clone, Debug)]
pub struct OracleSim {
    labels: Vec<usize>,
    revealed: Vec<bool>,
    query_count: usize,
}

impl OracleSim {
    pub fn new(labels: Vec<usize>) -> Self {
        let revealed = vec![false; labels.len()];
        OracleSim {
            labels,
            revealed,
            query_count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn query(&mut self, id: usize) -> usize {
        if !self.revealed[id] {
            self.revealed[id] = true;
            self.query_count += 1;
        }
        self.labels[id]
    }

    pub fn query_count(&self) -> usize {
        self.query_count
    }

    pub fn is_revealed(&self, id: usize) -> bool {
        self.revealed[id]
    }

    /// The annotator's initial labeling task: `per_class` instances of each
    /// class, chosen at random. The returned ids are not yet revealed.
    pub fn seed_sample(&self, per_class: usize, n_classes: usize, seed: u64) -> Result<Vec<usize>> {
        let mut rng = stream_rng(seed, STREAM_AL_SEED_SET);
        let mut out = Vec::with_capacity(per_class * n_classes);
        for class in 0..n_classes {
            let mut members: Vec<usize> = (0..self.labels.len())
                .filter(|&i| self.labels[i] == class)
                .collect();
            if members.len() < per_class {
                return Err(Error::InvalidArgument(format!(
                    "class {class} has {} pool instances, seeding needs {per_class}",
                    members.len()
                )));
            }
            let (chosen, _) = members.partial_shuffle(&mut rng, per_class);
            out.extend_from_slice(chosen);
        }
        out.sort_unstable();
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ALConfig {
    pub seed_per_class: usize,
    pub batch_size: usize,
    pub iterations: usize,
    pub strategy: QueryStrategy,
    pub model_spec: ModelSpec,
    pub seed: u64,
    /// Class whose F1 is tracked as `f1_requires`.
    pub target_class: usize,
}

impl Default for ALConfig {
    fn default() -> Self {
        ALConfig {
            seed_per_class: 60,
            batch_size: 20,
            iterations: 20,
            strategy: QueryStrategy::MinMargin,
            model_spec: ModelSpec::random_forest(100),
            seed: 0,
            target_class: 1,
        }
    }
}

impl ALConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seed_per_class == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument(
                "seed_per_class and batch_size must be positive".into(),
            ));
        }
        self.model_spec.validate()
    }
}

/// Unlabeled pool (labels held by the oracle) plus a labeled test set.
#[derive(Clone, Debug)]
pub struct ActiveDataset {
    pool_x: Vec<FeatureVector>,
    pool_labels: Vec<usize>,
    test: Dataset,
}

impl ActiveDataset {
    pub fn new(pool: Dataset, test: Dataset) -> Result<Self> {
        if pool.dim() != test.dim() || pool.n_classes() != test.n_classes() {
            return Err(Error::InvalidArgument(
                "pool and test sets disagree on shape".into(),
            ));
        }
        let pool_labels = pool.y().to_vec();
        Ok(ActiveDataset {
            pool_x: pool.x().to_vec(),
            pool_labels,
            test,
        })
    }

    pub fn pool_len(&self) -> usize {
        self.pool_x.len()
    }

    pub fn test(&self) -> &Dataset {
        &self.test
    }

    pub fn n_classes(&self) -> usize {
        self.test.n_classes()
    }

    pub fn oracle(&self) -> OracleSim {
        OracleSim::new(self.pool_labels.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub f1_requires: f64,
    pub macro_f1: f64,
    pub queried_ids: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningRun {
    pub strategy: QueryStrategy,
    pub records: Vec<IterationRecord>,
    /// Set when the pool ran out before all iterations completed.
    pub truncated: bool,
    pub oracle_queries: usize,
    /// Ids in the order their labels entered the training set.
    pub labeled_ids: Vec<usize>,
}

/// Runs the seed round and up to `config.iterations` query rounds,
/// retraining from scratch each time.
pub fn run_learning(dataset: &ActiveDataset, config: &ALConfig) -> Result<LearningRun> {
    config.validate()?;
    let n_classes = dataset.n_classes();
    if config.target_class >= n_classes {
        return Err(Error::InvalidArgument(format!(
            "target class {} outside 0..{n_classes}",
            config.target_class
        )));
    }
    let mut oracle = dataset.oracle();
    let seed_ids = oracle.seed_sample(config.seed_per_class, n_classes, config.seed)?;

    let mut labeled_ids: Vec<usize> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut remaining: BTreeSet<usize> = (0..dataset.pool_len()).collect();
    fn reveal(
        ids: &[usize],
        oracle: &mut OracleSim,
        labeled_ids: &mut Vec<usize>,
        labels: &mut Vec<usize>,
        remaining: &mut BTreeSet<usize>,
    ) {
        for &id in ids {
            labels.push(oracle.query(id));
            labeled_ids.push(id);
            remaining.remove(&id);
        }
    }
    reveal(
        &seed_ids,
        &mut oracle,
        &mut labeled_ids,
        &mut labels,
        &mut remaining,
    );

    let fit = |ids: &[usize], labels: &[usize]| -> Result<(Model, IterationRecord)> {
        let x = ids.iter().map(|&i| dataset.pool_x[i].clone()).collect();
        let train_set = Dataset::new(x, labels.to_vec(), n_classes, dataset.test.dim())?;
        let model = train(&train_set, &config.model_spec)?;
        let metrics = evaluate(&model, &dataset.test)?;
        let record = IterationRecord {
            iteration: 0,
            n_train: ids.len(),
            n_test: dataset.test.len(),
            f1_requires: metrics.class(config.target_class).f1,
            macro_f1: metrics.macro_f1,
            queried_ids: Vec::new(),
        };
        Ok((model, record))
    };

    let (mut model, mut first) = fit(&labeled_ids, &labels)?;
    first.queried_ids = seed_ids.clone();
    let mut records = vec![first];
    let mut truncated = false;
    for iteration in 1..=config.iterations {
        let pool: Vec<usize> = remaining.iter().copied().collect();
        if pool.len() < config.batch_size {
            log::warn!(
                "pool exhausted at iteration {iteration}: {} left, batch {}",
                pool.len(),
                config.batch_size
            );
            truncated = true;
            break;
        }
        let batch_seed = config.seed.wrapping_add(iteration as u64);
        let batch = select_batch(
            &pool,
            &dataset.pool_x,
            &model,
            config.strategy,
            config.batch_size,
            batch_seed,
        )?;
        reveal(
            &batch,
            &mut oracle,
            &mut labeled_ids,
            &mut labels,
            &mut remaining,
        );
        let (next, mut record) = fit(&labeled_ids, &labels)?;
        record.iteration = iteration;
        record.queried_ids = batch;
        model = next;
        records.push(record);
    }
    Ok(LearningRun {
        strategy: config.strategy,
        records,
        truncated,
        oracle_queries: oracle.query_count(),
        labeled_ids,
    })
}

pub const ITERATION_COLUMNS: [&str; 5] =
    ["iteration", "n_train", "n_test", "f1_requires", "macro_f1"];

pub fn write_iterations<W: Write>(sink: W, records: &[IterationRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(ITERATION_COLUMNS)?;
    for r in records {
        writer.write_record([
            r.iteration.to_string(),
            r.n_train.to_string(),
            r.n_test.to_string(),
            r.f1_requires.to_string(),
            r.macro_f1.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads an iterations CSV; `queried_ids` is not part of the file and comes
/// back empty.
pub fn read_iterations<R: Read>(source: R) -> Result<Vec<IterationRecord>> {
    let mut reader = csv::Reader::from_reader(source);
    let headers = reader.headers()?.clone();
    for name in ITERATION_COLUMNS {
        if !headers.iter().any(|h| h == name) {
            return Err(Error::MissingColumn(name.into()));
        }
    }
    #[derive(Deserialize)]
    struct Row {
        iteration: usize,
        n_train: usize,
        n_test: usize,
        f1_requires: f64,
        macro_f1: f64,
    }
    reader
        .deserialize::<Row>()
        .map(|r| {
            let r = r?;
            Ok(IterationRecord {
                iteration: r.iteration,
                n_train: r.n_train,
                n_test: r.n_test,
                f1_requires: r.f1_requires,
                macro_f1: r.macro_f1,
                queried_ids: Vec::new(),
            })
        })
        .collect()
}
