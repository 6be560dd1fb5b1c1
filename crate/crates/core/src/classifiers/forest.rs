//! CART trees on Gini impurity and a bagged random forest.
//!
//! Trees train on a column-major copy of the count matrix. Split search
//! buckets the (small integer) counts per feature, so evaluating a feature
//! is linear in the node size.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClassProbabilities, Dataset, ModelSpec};
use crate::seed::{indexed_rng, StreamRng};
use crate::textprep::FeatureVector;
use crate::{Error, Result};

const TREE_STREAM_FAMILY: u64 = 1;
const MAX_BUCKETED_VALUE: u16 = 255;

/// Column-major dense copy of a dataset's counts.
pub(crate) struct ColumnMatrix {
    n_rows: usize,
    columns: Vec<u16>,
}

impl ColumnMatrix {
    pub(crate) fn from_dataset(data: &Dataset) -> Self {
        let n_rows = data.len();
        let mut columns = vec![0u16; n_rows * data.dim()];
        for (row, x) in data.x().iter().enumerate() {
            for &(j, c) in x.entries() {
                columns[j as usize * n_rows + row] = c.min(u16::MAX as u32) as u16;
            }
        }
        ColumnMatrix { n_rows, columns }
    }

    fn column(&self, feature: usize) -> &[u16] {
        &self.columns[feature * self.n_rows..(feature + 1) * self.n_rows]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

/// Tree-growing limits shared by every tree of a forest.
#[derive(Clone, Copy, Debug)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    /// Bootstrap sample (row indices, with repetition) the tree was grown on.
    bootstrap: Vec<u32>,
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

struct Grower<'a> {
    matrix: &'a ColumnMatrix,
    labels: &'a [usize],
    n_classes: usize,
    n_features: usize,
    params: TreeParams,
    feature_order: Vec<usize>,
    nodes: Vec<Node>,
}

fn majority(counts: &[u32]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

fn sum_sq_over_n(counts: &[u32], n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    counts.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>() / n as f64
}

impl<'a> Grower<'a> {
    fn class_counts(&self, samples: &[u32]) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_classes];
        for &s in samples {
            counts[self.labels[s as usize]] += 1;
        }
        counts
    }

    fn push(&mut self, node: Node) -> u32 {
        self.nodes.push(node);
        (self.nodes.len() - 1) as u32
    }

    fn grow(&mut self, samples: &mut [u32], depth: usize, rng: &mut StreamRng) -> u32 {
        let counts = self.class_counts(samples);
        let n = samples.len() as u32;
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || samples.len() < self.params.min_samples_split {
            return self.push(Node::Leaf {
                class: majority(&counts),
            });
        }
        let parent_score = sum_sq_over_n(&counts, n);
        let best = self.best_split(samples, &counts, rng);
        let Some(best) = best.filter(|b| b.score > parent_score + 1e-12) else {
            return self.push(Node::Leaf {
                class: majority(&counts),
            });
        };

        let column = self.matrix.column(best.feature);
        let mut left_len = 0;
        for i in 0..samples.len() {
            if (column[samples[i] as usize] as f64) <= best.threshold {
                samples.swap(i, left_len);
                left_len += 1;
            }
        }
        let id = self.push(Node::Leaf { class: 0 });
        let (left, right) = samples.split_at_mut(left_len);
        let left_id = self.grow(left, depth + 1, rng);
        let right_id = self.grow(right, depth + 1, rng);
        self.nodes[id as usize] = Node::Split {
            feature: best.feature as u32,
            threshold: best.threshold,
            left: left_id,
            right: right_id,
        };
        id
    }

    /// Visits features in random order until `max_features` non-constant
    /// ones have been scored. Score is `sum_c nL_c^2/nL + sum_c nR_c^2/nR`,
    /// which is maximal where weighted Gini impurity is minimal.
    fn best_split(
        &mut self,
        samples: &[u32],
        counts: &[u32],
        rng: &mut StreamRng,
    ) -> Option<SplitCandidate> {
        let mut best: Option<SplitCandidate> = None;
        let mut visited = 0;
        let k = self.n_classes;
        let mut hist: Vec<u32> = Vec::new();
        for drawn in 0..self.n_features {
            if visited >= self.params.max_features {
                break;
            }
            let pick = rng.gen_range(drawn..self.n_features);
            self.feature_order.swap(drawn, pick);
            let feature = self.feature_order[drawn];
            let column = self.matrix.column(feature);

            let (mut lo, mut hi) = (u16::MAX, 0u16);
            for &s in samples {
                let v = column[s as usize];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if lo == hi {
                continue;
            }
            visited += 1;

            // (value, per-class counts) in increasing value order.
            let levels: Vec<(u16, Vec<u32>)> = if hi <= MAX_BUCKETED_VALUE {
                let width = (hi - lo) as usize + 1;
                hist.clear();
                hist.resize(width * k, 0);
                for &s in samples {
                    let v = (column[s as usize] - lo) as usize;
                    hist[v * k + self.labels[s as usize]] += 1;
                }
                (0..width)
                    .filter_map(|v| {
                        let row = &hist[v * k..(v + 1) * k];
                        row.iter()
                            .any(|&c| c > 0)
                            .then(|| (lo + v as u16, row.to_vec()))
                    })
                    .collect()
            } else {
                let mut pairs: Vec<(u16, usize)> = samples
                    .iter()
                    .map(|&s| (column[s as usize], self.labels[s as usize]))
                    .collect();
                pairs.sort_unstable();
                let mut levels: Vec<(u16, Vec<u32>)> = Vec::new();
                for (v, c) in pairs {
                    if levels.last().map(|l| l.0) != Some(v) {
                        levels.push((v, vec![0; k]));
                    }
                    levels.last_mut().expect("just pushed").1[c] += 1;
                }
                levels
            };

            let mut left = vec![0u32; k];
            let mut n_left = 0u32;
            let n = samples.len() as u32;
            for w in levels.windows(2) {
                for (l, &c) in left.iter_mut().zip(&w[0].1) {
                    *l += c;
                }
                n_left += w[0].1.iter().sum::<u32>();
                let right: Vec<u32> = counts.iter().zip(&left).map(|(&t, &l)| t - l).collect();
                let score = sum_sq_over_n(&left, n_left) + sum_sq_over_n(&right, n - n_left);
                if best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(SplitCandidate {
                        feature,
                        threshold: (w[0].0 as f64 + w[1].0 as f64) / 2.0,
                        score,
                    });
                }
            }
        }
        best
    }
}

impl DecisionTree {
    pub(crate) fn grow(
        matrix: &ColumnMatrix,
        labels: &[usize],
        n_classes: usize,
        n_features: usize,
        bootstrap: Vec<u32>,
        params: TreeParams,
        rng: &mut StreamRng,
    ) -> Self {
        let mut grower = Grower {
            matrix,
            labels,
            n_classes,
            n_features,
            params,
            feature_order: (0..n_features).collect(),
            nodes: Vec::new(),
        };
        let mut samples = bootstrap.clone();
        grower.grow(&mut samples, 0, rng);
        DecisionTree {
            nodes: grower.nodes,
            bootstrap,
        }
    }

    pub fn predict(&self, x: &FeatureVector) -> usize {
        let mut id = 0usize;
        loop {
            match &self.nodes[id] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if (x.get(*feature as usize) as f64) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    /// Feature and threshold of the root split, if the root is not a leaf.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first()? {
            Node::Split {
                feature, threshold, ..
            } => Some((*feature as usize, *threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn bootstrap(&self) -> &[u32] {
        &self.bootstrap
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    n_classes: usize,
    dim: usize,
}

impl RandomForest {
    /// Grows `spec.rf_n_trees` trees in parallel. Tree `i` draws its
    /// bootstrap and feature choices from a stream keyed by
    /// `(spec.seed, i)`, so the forest does not depend on scheduling.
    pub fn fit(data: &Dataset, spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        data.require_two_classes()?;
        let matrix = ColumnMatrix::from_dataset(data);
        let n = data.len();
        let params = TreeParams {
            max_depth: spec.rf_max_depth,
            min_samples_split: spec.rf_min_samples_split,
            max_features: spec.rf_max_features.resolve(data.dim()),
        };
        let trees = (0..spec.rf_n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = indexed_rng(spec.seed, TREE_STREAM_FAMILY, t as u64);
                let bootstrap: Vec<u32> = (0..n).map(|_| rng.gen_range(0..n) as u32).collect();
                DecisionTree::grow(
                    &matrix,
                    data.y(),
                    data.n_classes(),
                    data.dim(),
                    bootstrap,
                    params,
                    &mut rng,
                )
            })
            .collect();
        Ok(RandomForest {
            trees,
            n_classes: data.n_classes(),
            dim: data.dim(),
        })
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Fraction of trees voting for each class.
    pub fn predict_proba(&self, x: &FeatureVector) -> Result<ClassProbabilities> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        let mut votes = vec![0u32; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict(x)] += 1;
        }
        let total = self.trees.len() as f64;
        Ok(ClassProbabilities::new_unchecked(
            votes.into_iter().map(|v| v as f64 / total).collect(),
        ))
    }
}
