//! Multinomial Naive Bayes with additive (Laplace/Lidstone) smoothing.
//!
//! Estimates are kept in log space; probabilities are produced with a
//! log-sum-exp normalization at prediction time.

use serde::{Deserialize, Serialize};

use super::{ClassProbabilities, Dataset};
use crate::textprep::FeatureVector;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultinomialNb {
    alpha: f64,
    class_log_prior: Vec<f64>,
    /// `[class][feature]` log P(feature | class).
    feature_log_prob: Vec<Vec<f64>>,
    dim: usize,
}

impl MultinomialNb {
    pub fn fit(data: &Dataset, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        data.require_two_classes()?;
        let k = data.n_classes();
        let dim = data.dim();
        let mut feature_counts = vec![vec![0f64; dim]; k];
        for (x, &c) in data.x().iter().zip(data.y()) {
            for &(j, n) in x.entries() {
                feature_counts[c][j as usize] += n as f64;
            }
        }
        let n = data.len() as f64;
        let class_log_prior = data
            .class_counts()
            .iter()
            .map(|&c| (c as f64 / n).ln())
            .collect();
        let feature_log_prob = feature_counts
            .into_iter()
            .map(|counts| {
                let total: f64 = counts.iter().sum::<f64>() + alpha * dim as f64;
                let log_total = total.ln();
                counts
                    .iter()
                    .map(|&c| (c + alpha).ln() - log_total)
                    .collect()
            })
            .collect();
        Ok(MultinomialNb {
            alpha,
            class_log_prior,
            feature_log_prob,
            dim,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.class_log_prior.len()
    }

    /// Unnormalized log joint `log P(c) + sum_j x_j log P(j | c)`.
    pub fn joint_log_likelihood(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(self
            .class_log_prior
            .iter()
            .zip(&self.feature_log_prob)
            .map(|(&prior, flp)| {
                prior
                    + x.entries()
                        .iter()
                        .map(|&(j, n)| n as f64 * flp[j as usize])
                        .sum::<f64>()
            })
            .collect())
    }

    pub fn predict_proba(&self, x: &FeatureVector) -> Result<ClassProbabilities> {
        let jll = self.joint_log_likelihood(x)?;
        let max = jll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = jll.iter().map(|&v| (v - max).exp()).collect();
        let sum: f64 = exp.iter().sum();
        Ok(ClassProbabilities::new_unchecked(
            exp.into_iter().map(|e| e / sum).collect(),
        ))
    }
}
