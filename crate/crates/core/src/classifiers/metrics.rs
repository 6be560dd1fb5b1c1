use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const PROB_SUM_TOL: f64 = 1e-9;

/// Probability vector over the fixed class ordering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassProbabilities(Vec<f64>);

impl ClassProbabilities {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty probability vector".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "invalid probabilities {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(ClassProbabilities(probs))
    }

    pub(crate) fn new_unchecked(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= PROB_SUM_TOL);
        ClassProbabilities(probs)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest probability; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate().skip(1) {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// One-vs-rest confusion counts and derived scores for a class.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ClassMetrics {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            tp,
            fp,
            fn_,
            tn,
            precision,
            recall,
            f1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub per_class: Vec<ClassMetrics>,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub n: u64,
}

impl EvalMetrics {
    /// Metrics from parallel truth/prediction label slices.
    pub fn from_predictions(truth: &[usize], predicted: &[usize], n_classes: usize) -> Self {
        assert_eq!(
            truth.len(),
            predicted.len(),
            "truth and prediction lengths differ"
        );
        let mut confusion = vec![vec![0u64; n_classes]; n_classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            confusion[t][p] += 1;
        }
        Self::from_confusion(&confusion)
    }

    /// Metrics from a confusion matrix indexed `[truth][predicted]`.
    pub fn from_confusion(confusion: &[Vec<u64>]) -> Self {
        let k = confusion.len();
        let n: u64 = confusion.iter().flatten().sum();
        let per_class: Vec<ClassMetrics> = (0..k)
            .map(|c| {
                let tp = confusion[c][c];
                let fn_ = confusion[c].iter().sum::<u64>() - tp;
                let fp = (0..k).map(|r| confusion[r][c]).sum::<u64>() - tp;
                ClassMetrics::from_counts(tp, fp, fn_, n - tp - fp - fn_)
            })
            .collect();
        let correct: u64 = (0..k).map(|c| confusion[c][c]).sum();
        let macro_f1 = if k == 0 {
            0.0
        } else {
            per_class.iter().map(|m| m.f1).sum::<f64>() / k as f64
        };
        EvalMetrics {
            per_class,
            macro_f1,
            accuracy: ratio(correct, n),
            n,
        }
    }

    pub fn class(&self, index: usize) -> &ClassMetrics {
        &self.per_class[index]
    }

    /// Micro-averaged F1 from summed one-vs-rest counts.
    pub fn micro_f1(&self) -> f64 {
        let tp: u64 = self.per_class.iter().map(|m| m.tp).sum();
        let fp: u64 = self.per_class.iter().map(|m| m.fp).sum();
        let fn_: u64 = self.per_class.iter().map(|m| m.fn_).sum();
        ClassMetrics::from_counts(tp, fp, fn_, 0).f1
    }
}
