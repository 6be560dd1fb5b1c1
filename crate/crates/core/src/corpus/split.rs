use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DependencyLabel, LabelScheme, RequirementPair};
use crate::seed::{stream_rng, STREAM_BALANCE, STREAM_SPLIT};
use crate::{Error, Result};

/// A stratified train/test partition of labeled pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<RequirementPair>,
    pub test: Vec<RequirementPair>,
    pub seed: u64,
    pub ratio: f64,
}

/// Splits `total = sum(sizes)` items so that `round(ratio * total)` land in
/// the first part, distributing per group by largest remainder (ties go to
/// the earlier group).
pub fn apportion(sizes: &[usize], ratio: f64) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    let target = ((ratio * total as f64).round() as usize).min(total);
    let mut shares: Vec<usize> = sizes
        .iter()
        .map(|&s| ((ratio * s as f64).floor() as usize).min(s))
        .collect();
    let mut assigned: usize = shares.iter().sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    let remainder = |i: usize| ratio * sizes[i] as f64 - shares[i] as f64;
    let rems: Vec<f64> = order.iter().map(|&i| remainder(i)).collect();
    order.sort_by(|&a, &b| rems[b].total_cmp(&rems[a]).then(a.cmp(&b)));
    for &i in order.iter().cycle().take(sizes.len() * 2) {
        if assigned >= target {
            break;
        }
        if shares[i] < sizes[i] {
            shares[i] += 1;
            assigned += 1;
        }
    }
    shares
}

fn sort_pairs(pairs: &mut [RequirementPair]) {
    pairs.sort_by(|x, y| x.key().cmp(&y.key()));
}

fn validate_ratio(ratio: f64) -> Result<()> {
    if ratio.is_finite() && ratio > 0.0 && ratio <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "split ratio must lie in (0, 1], got {ratio}"
        )))
    }
}

fn group_by_label(pairs: &[RequirementPair]) -> Result<Vec<(DependencyLabel, Vec<usize>)>> {
    let scheme = LabelScheme::infer(pairs.iter().map(|p| p.label))?;
    let mut groups: Vec<(DependencyLabel, Vec<usize>)> =
        scheme.classes().iter().map(|&c| (c, Vec::new())).collect();
    for (i, p) in pairs.iter().enumerate() {
        let slot = scheme
            .index_of(p.label)
            .expect("label belongs to inferred scheme");
        groups[slot].1.push(i);
    }
    Ok(groups)
}

/// Stratified train/test split without rebalancing. Classes of the inferred
/// label scheme with no members are skipped.
pub fn stratified_split(pairs: &[RequirementPair], ratio: f64, seed: u64) -> Result<DatasetSplit> {
    validate_ratio(ratio)?;
    let mut groups = group_by_label(pairs)?;
    groups.retain(|(_, members)| !members.is_empty());
    let mut rng = stream_rng(seed, STREAM_SPLIT);
    for (_, members) in groups.iter_mut() {
        members.shuffle(&mut rng);
    }
    let sizes: Vec<usize> = groups.iter().map(|(_, m)| m.len()).collect();
    let shares = apportion(&sizes, ratio);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for ((_, members), n_train) in groups.iter().zip(shares) {
        train.extend(members[..n_train].iter().map(|&i| pairs[i].clone()));
        test.extend(members[n_train..].iter().map(|&i| pairs[i].clone()));
    }
    sort_pairs(&mut train);
    sort_pairs(&mut test);
    Ok(DatasetSplit {
        train,
        test,
        seed,
        ratio,
    })
}

/// Undersamples every class to the minority-class count, then performs a
/// stratified split at `ratio`.
pub fn balance_and_split(pairs: &[RequirementPair], ratio: f64, seed: u64) -> Result<DatasetSplit> {
    validate_ratio(ratio)?;
    let mut groups = group_by_label(pairs)?;
    if let Some((label, _)) = groups.iter().find(|(_, m)| m.is_empty()) {
        return Err(Error::MissingClass(*label));
    }
    let minority = groups.iter().map(|(_, m)| m.len()).min().unwrap_or(0);
    let mut rng = stream_rng(seed, STREAM_BALANCE);
    let mut balanced = Vec::with_capacity(minority * groups.len());
    for (_, members) in groups.iter_mut() {
        if members.len() > minority {
            let (kept, _) = members.partial_shuffle(&mut rng, minority);
            balanced.extend(kept.iter().map(|&i| pairs[i].clone()));
        } else {
            balanced.extend(members.iter().map(|&i| pairs[i].clone()));
        }
    }
    sort_pairs(&mut balanced);
    stratified_split(&balanced, ratio, seed)
}
