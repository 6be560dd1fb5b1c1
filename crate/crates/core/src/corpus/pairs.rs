use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DependencyLabel, RequirementRecord};
use crate::seed::{stream_rng, STREAM_INDEPENDENT};
use crate::{Error, Result};

pub const PAIR_COLUMNS: [&str; 5] = ["id_a", "id_b", "text_a", "text_b", "label"];

/// An unordered pair of requirements, stored with `id_a < id_b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementPair {
    pub id_a: String,
    pub id_b: String,
    pub text_a: String,
    pub text_b: String,
    pub label: DependencyLabel,
}

impl RequirementPair {
    /// Builds a pair, swapping the sides if needed so the ids are in
    /// canonical order.
    pub fn new(
        id_a: impl Into<String>,
        text_a: impl Into<String>,
        id_b: impl Into<String>,
        text_b: impl Into<String>,
        label: DependencyLabel,
    ) -> Self {
        let (id_a, text_a, id_b, text_b) = (id_a.into(), text_a.into(), id_b.into(), text_b.into());
        if id_a <= id_b {
            RequirementPair {
                id_a,
                id_b,
                text_a,
                text_b,
                label,
            }
        } else {
            RequirementPair {
                id_a: id_b,
                id_b: id_a,
                text_a: text_b,
                text_b: text_a,
                label,
            }
        }
    }

    pub fn key(&self) -> (&str, &str) {
        (&self.id_a, &self.id_b)
    }
}

/// Output of [`build_pairs`]: the pairs plus any skipped-link warnings.
#[derive(Clone, Debug, Default)]
pub struct PairBuild {
    pub pairs: Vec<RequirementPair>,
    pub warnings: Vec<String>,
}

/// Derives labeled pairs from record links.
///
/// `depends_on` links become REQUIRES, `see_also` links not already
/// REQUIRES become OTHER, and `round(independent_ratio * dependent)`
/// unlinked pairs are sampled uniformly as INDEPENDENT. The result is sorted
/// by canonical pair key and does not depend on record order or link
/// direction.
pub fn build_pairs(
    records: &[RequirementRecord],
    independent_ratio: f64,
    seed: u64,
) -> Result<PairBuild> {
    if !(independent_ratio.is_finite() && independent_ratio > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "independent_ratio must be positive, got {independent_ratio}"
        )));
    }
    let mut sorted: Vec<&RequirementRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    for w in sorted.windows(2) {
        if w[0].id == w[1].id {
            return Err(Error::Integrity(format!("duplicate id `{}`", w[0].id)));
        }
    }
    let position: HashMap<&str, usize> = sorted
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.as_str(), i))
        .collect();

    let mut warnings = Vec::new();
    let mut linked: BTreeMap<(usize, usize), DependencyLabel> = BTreeMap::new();
    let mut resolve = |from: usize, target: &str, field: &str| -> Option<(usize, usize)> {
        match position.get(target) {
            None => {
                warnings.push(format!(
                    "record {}: {field} link to unknown id `{target}` skipped",
                    sorted[from].id
                ));
                None
            }
            Some(&to) if to == from => None,
            Some(&to) => Some((from.min(to), from.max(to))),
        }
    };
    let mut requires = Vec::new();
    let mut others = Vec::new();
    for (i, rec) in sorted.iter().enumerate() {
        requires.extend(
            rec.depends_on
                .iter()
                .filter_map(|t| resolve(i, t, "depends_on")),
        );
        others.extend(
            rec.see_also
                .iter()
                .filter_map(|t| resolve(i, t, "see_also")),
        );
    }
    for key in requires {
        linked.insert(key, DependencyLabel::Requires);
    }
    for key in others {
        linked.entry(key).or_insert(DependencyLabel::Other);
    }
    if linked.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let n = sorted.len();
    let total = n * (n - 1) / 2;
    let available = total - linked.len();
    let mut target = (independent_ratio * linked.len() as f64).round() as usize;
    if target > available {
        warnings.push(format!(
            "only {available} unlinked pairs available, {target} INDEPENDENT pairs requested"
        ));
        target = available;
    }
    let independent = sample_unlinked(n, &linked, target, seed);

    let mut pairs: Vec<RequirementPair> = linked
        .iter()
        .map(|(&k, &l)| (k, l))
        .chain(
            independent
                .into_iter()
                .map(|k| (k, DependencyLabel::Independent)),
        )
        .map(|((a, b), label)| RequirementPair {
            id_a: sorted[a].id.clone(),
            id_b: sorted[b].id.clone(),
            text_a: sorted[a].title.clone(),
            text_b: sorted[b].title.clone(),
            label,
        })
        .collect();
    pairs.sort_by(|x, y| x.key().cmp(&y.key()));
    Ok(PairBuild { pairs, warnings })
}

fn sample_unlinked(
    n: usize,
    linked: &BTreeMap<(usize, usize), DependencyLabel>,
    target: usize,
    seed: u64,
) -> BTreeSet<(usize, usize)> {
    let mut rng = stream_rng(seed, STREAM_INDEPENDENT);
    let available = n * (n - 1) / 2 - linked.len();
    if target == 0 {
        return BTreeSet::new();
    }
    if target * 2 >= available {
        // Dense request: enumerate and shuffle.
        let mut all: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|k| !linked.contains_key(k))
            .collect();
        let (chosen, _) = all.partial_shuffle(&mut rng, target);
        return chosen.iter().copied().collect();
    }
    let mut chosen = BTreeSet::new();
    while chosen.len() < target {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if !linked.contains_key(&key) {
            chosen.insert(key);
        }
    }
    chosen
}

/// Drops pairs where either text has fewer than `min_words` whitespace
/// tokens, then optionally collapses REQUIRES/OTHER into DEPENDENT.
pub fn filter_and_binarize(
    pairs: &[RequirementPair],
    min_words: usize,
    binary: bool,
) -> Vec<RequirementPair> {
    let words = |t: &str| t.split_whitespace().count();
    pairs
        .iter()
        .filter(|p| words(&p.text_a) >= min_words && words(&p.text_b) >= min_words)
        .map(|p| {
            let mut p = p.clone();
            if binary {
                p.label = p.label.binary();
            }
            p
        })
        .collect()
}

pub fn write_pairs<W: Write>(sink: W, pairs: &[RequirementPair]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(PAIR_COLUMNS)?;
    for p in pairs {
        writer.write_record([
            p.id_a.as_str(),
            &p.id_b,
            &p.text_a,
            &p.text_b,
            p.label.as_str(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a pairs CSV (`id_a,id_b,text_a,text_b,label`), canonicalizing each
/// pair and rejecting duplicates.
pub fn read_pairs<R: Read>(source: R) -> Result<Vec<RequirementPair>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::Headers)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let mut columns = [0usize; 5];
    for (slot, name) in columns.iter_mut().zip(PAIR_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::new();
    for (row, result) in reader.records().enumerate() {
        let rec = result?;
        let cell = |i: usize| rec.get(columns[i]).unwrap_or("");
        let label: DependencyLabel = cell(4)
            .parse()
            .map_err(|e| Error::Schema(format!("row {}: {e}", row + 2)))?;
        let pair = RequirementPair::new(cell(0), cell(2), cell(1), cell(3), label);
        if pair.id_a == pair.id_b {
            return Err(Error::Integrity(format!(
                "row {}: self pair `{}`",
                row + 2,
                pair.id_a
            )));
        }
        if !seen.insert((pair.id_a.clone(), pair.id_b.clone())) {
            return Err(Error::Integrity(format!(
                "row {}: duplicate pair ({}, {})",
                row + 2,
                pair.id_a,
                pair.id_b
            )));
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

pub fn read_pairs_path(path: impl AsRef<Path>) -> Result<Vec<RequirementPair>> {
    read_pairs(File::open(path)?)
}
