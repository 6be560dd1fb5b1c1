use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, train, ClassMetrics, Dataset, EvalMetrics, ModelSpec};
use crate::seed::{stream_rng, STREAM_FOLDS};
use crate::{Error, Result};

/// Fold index per sample. Each class is shuffled and dealt round-robin, so
/// fold sizes differ by at most one per class.
pub fn stratified_folds(y: &[usize], n_classes: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if y.len() < k {
        return Err(Error::InvalidArgument(format!(
            "{} samples cannot fill {k} folds",
            y.len()
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in y.iter().enumerate() {
        by_class[c].push(i);
    }
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < k {
            return Err(Error::FoldMissingClass {
                class,
                count: members.len(),
                k,
            });
        }
    }
    let mut rng = stream_rng(seed, STREAM_FOLDS);
    let mut fold = vec![0; y.len()];
    let mut next = 0;
    for members in by_class.iter_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            fold[i] = next % k;
            next += 1;
        }
    }
    Ok(fold)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: ModelSpec,
    pub best_index: usize,
    /// Mean macro-F1 over folds, per grid entry.
    pub mean_macro_f1: Vec<f64>,
    /// Per-fold metrics of the best spec.
    pub folds: Vec<EvalMetrics>,
    /// Best spec's metrics from the confusion counts summed over folds.
    pub pooled: EvalMetrics,
}

/// Stratified k-fold grid search on mean macro-F1; ties go to the earliest
/// grid entry.
pub fn cross_validate_tune(
    grid: &[ModelSpec],
    data: &Dataset,
    k: usize,
    seed: u64,
) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty tuning grid".into()));
    }
    let fold_of = stratified_folds(data.y(), data.n_classes(), k, seed)?;
    let splits: Vec<(Dataset, Dataset)> = (0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..data.len()).partition(|&i| fold_of[i] == f);
            (data.subset(&train), data.subset(&test))
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..k).map(move |f| (g, f)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(g, f)| {
            let (train_set, test_set) = &splits[f];
            let model = train(train_set, &grid[g])?;
            evaluate(&model, test_set)
        })
        .collect::<Result<Vec<EvalMetrics>>>()?;

    let mean_macro_f1: Vec<f64> = results
        .chunks(k)
        .map(|folds| folds.iter().map(|m| m.macro_f1).sum::<f64>() / k as f64)
        .collect();
    let mut best_index = 0;
    for (i, &s) in mean_macro_f1.iter().enumerate() {
        if s > mean_macro_f1[best_index] {
            best_index = i;
        }
    }
    let folds = results[best_index * k..(best_index + 1) * k].to_vec();
    let pooled = pool_one_vs_rest(&folds);
    Ok(TuneResult {
        best: grid[best_index].clone(),
        best_index,
        mean_macro_f1,
        folds,
        pooled,
    })
}

fn pool_one_vs_rest(folds: &[EvalMetrics]) -> EvalMetrics {
    let n_classes = folds[0].per_class.len();
    let per_class: Vec<ClassMetrics> = (0..n_classes)
        .map(|c| {
            let (tp, fp, fn_, tn) = folds
                .iter()
                .map(|m| m.class(c))
                .fold((0, 0, 0, 0), |acc, m| {
                    (acc.0 + m.tp, acc.1 + m.fp, acc.2 + m.fn_, acc.3 + m.tn)
                });
            ClassMetrics::from_counts(tp, fp, fn_, tn)
        })
        .collect();
    let n: u64 = folds.iter().map(|m| m.n).sum();
    let correct: u64 = per_class.iter().map(|m| m.tp).sum();
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / n_classes as f64;
    EvalMetrics {
        per_class,
        macro_f1,
        accuracy: correct as f64 / n as f64,
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::FeatureVector;

    fn toy(n_per_class: usize) -> Dataset {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n_per_class {
            x.push(FeatureVector::from_dense(&[3 + (i % 2) as u32, 0]));
            y.push(0);
            x.push(FeatureVector::from_dense(&[0, 2 + (i % 3) as u32]));
            y.push(1);
        }
        Dataset::new(x, y, 2, 2).unwrap()
    }

    #[test]
    fn two_folds_partition_ten_items() {
        let data = toy(5);
        let folds = stratified_folds(data.y(), 2, 2, 4).unwrap();
        assert_eq!(folds.iter().filter(|&&f| f == 0).count(), 5);
        assert_eq!(folds.iter().filter(|&&f| f == 1).count(), 5);
    }

    #[test]
    fn too_few_members_for_k() {
        let data = toy(3);
        assert!(matches!(
            stratified_folds(data.y(), 2, 4, 0),
            Err(Error::FoldMissingClass { k: 4, count: 3, .. })
        ));
        assert!(stratified_folds(data.y(), 2, 1, 0).is_err());
    }

    #[test]
    fn singleton_grid_and_tie_break() {
        let data = toy(10);
        let spec = ModelSpec::naive_bayes(1.0);
        let one = cross_validate_tune(&[spec.clone()], &data, 5, 0).unwrap();
        assert_eq!(one.best, spec);
        assert_eq!(one.folds.len(), 5);
        assert_eq!(one.pooled.n, 20);

        let twin = ModelSpec::naive_bayes(1.0).with_seed(99);
        let two = cross_validate_tune(&[twin.clone(), spec], &data, 5, 0).unwrap();
        assert_eq!(two.best_index, 0);
        assert_eq!(two.best, twin);
    }
}
