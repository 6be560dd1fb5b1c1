use crate::textprep::FeatureVector;
use crate::{Error, Result};

/// Feature vectors with class indices in `0..n_classes`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: Vec<FeatureVector>,
    y: Vec<usize>,
    n_classes: usize,
    dim: usize,
}

impl Dataset {
    pub fn new(x: Vec<FeatureVector>, y: Vec<usize>, n_classes: usize, dim: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "{} vectors but {} labels",
                x.len(),
                y.len()
            )));
        }
        if let Some(v) = x.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
        if let Some(&c) = y.iter().find(|&&c| c >= n_classes) {
            return Err(Error::InvalidArgument(format!(
                "label {c} outside 0..{n_classes}"
            )));
        }
        Ok(Dataset {
            x,
            y,
            n_classes,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn x(&self) -> &[FeatureVector] {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &c in &self.y {
            counts[c] += 1;
        }
        counts
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: indices.iter().map(|&i| self.x[i].clone()).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            n_classes: self.n_classes,
            dim: self.dim,
        }
    }

    pub(crate) fn require_two_classes(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InvalidArgument("empty training set".into()));
        }
        if self.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
            return Err(Error::SingleClass);
        }
        Ok(())
    }
}
