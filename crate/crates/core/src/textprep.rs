//! Text normalization and bag-of-words encoding of requirement pairs.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::RequirementPair;
use crate::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

/// Reads a stopword list, one token per line.
pub fn load_stopwords<R: BufRead>(reader: R) -> Result<HashSet<String>> {
    let mut out = HashSet::new();
    for line in reader.lines() {
        let token = line?.trim().to_lowercase();
        if !token.is_empty() {
            out.insert(token);
        }
    }
    Ok(out)
}

/// Strips one of `ing`, `ed`, `ies`, `es`, `s`, keeping at least three
/// characters of stem.
pub fn stem(token: &str) -> String {
    let n = token.len();
    if n > 6 && token.ends_with("ing") {
        return token[..n - 3].to_string();
    }
    if n > 5 && token.ends_with("ed") {
        return token[..n - 2].to_string();
    }
    if n > 4 && token.ends_with("ies") {
        return format!("{}y", &token[..n - 3]);
    }
    if n > 4 && token.ends_with("es") {
        let base = &token[..n - 2];
        if ["s", "x", "z", "ch", "sh"]
            .iter()
            .any(|s| base.ends_with(s))
        {
            return base.to_string();
        }
    }
    if n > 3 && token.ends_with('s') && !token.ends_with("ss") {
        return token[..n - 1].to_string();
    }
    token.to_string()
}

/// Lowercases, keeps only `[a-z ]`, splits on whitespace, drops stopwords and
/// stems the rest.
pub fn preprocess(text: &str, stopwords: &HashSet<String>) -> Vec<String> {
    tokenize(text, stopwords, true)
}

fn tokenize(text: &str, stopwords: &HashSet<String>, stemming: bool) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .map(|c| {
            if c.is_whitespace() {
                ' '
            } else {
                c.to_ascii_lowercase()
            }
        })
        .filter(|c| c.is_ascii_lowercase() || *c == ' ')
        .collect();
    cleaned
        .split_whitespace()
        .filter(|t| !stopwords.contains(*t))
        .map(|t| if stemming { stem(t) } else { t.to_string() })
        .collect()
}

/// Stopword set plus stemming switch.
#[derive(Clone, Debug)]
pub struct TextPipeline {
    stopwords: HashSet<String>,
    stemming: bool,
}

impl Default for TextPipeline {
    fn default() -> Self {
        TextPipeline {
            stopwords: default_stopwords(),
            stemming: true,
        }
    }
}

impl TextPipeline {
    pub fn new(stopwords: HashSet<String>, stemming: bool) -> Self {
        TextPipeline {
            stopwords,
            stemming,
        }
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        tokenize(text, &self.stopwords, self.stemming)
    }

    /// Tokens of both texts of a pair, concatenated.
    pub fn pair_tokens(&self, pair: &RequirementPair) -> Vec<String> {
        let mut out = self.tokens(&pair.text_a);
        out.extend(self.tokens(&pair.text_b));
        out
    }
}

/// Dense token index built from training documents only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Vocabulary {
    tokens: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    fitted_on: String,
    min_df: usize,
}

impl Vocabulary {
    /// Indexes tokens occurring in at least `min_df` documents,
    /// lexicographically.
    pub fn fit(docs: &[Vec<String>], min_df: usize) -> Result<Vocabulary> {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        let mut hasher = Sha256::new();
        for doc in docs {
            let unique: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
            for t in unique {
                *df.entry(t).or_default() += 1;
            }
            hasher.update(doc.join(" ").as_bytes());
            hasher.update(b"\n");
        }
        let tokens: Vec<String> = df
            .into_iter()
            .filter(|&(_, n)| n >= min_df)
            .map(|(t, _)| t.to_string())
            .collect();
        if tokens.is_empty() {
            return Err(Error::EmptyVocabulary(min_df));
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocabulary {
            tokens,
            index,
            fitted_on: hex::encode(hasher.finalize()),
            min_df,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    /// SHA-256 of the documents the vocabulary was fitted on.
    pub fn fitted_on(&self) -> &str {
        &self.fitted_on
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }

    pub fn vectorize(&self, tokens: &[String]) -> FeatureVector {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for t in tokens {
            if let Some(i) = self.get(t) {
                *counts.entry(i as u32).or_default() += 1;
            }
        }
        FeatureVector {
            entries: counts.into_iter().collect(),
            dim: self.len(),
        }
    }
}

/// Sparse token counts: indices strictly increasing, counts positive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    entries: Vec<(u32, u32)>,
    dim: usize,
}

impl FeatureVector {
    pub fn from_entries(mut entries: Vec<(u32, u32)>, dim: usize) -> Result<Self> {
        entries.sort_unstable_by_key(|e| e.0);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "duplicate feature index {}",
                    w[0].0
                )));
            }
        }
        if entries.iter().any(|&(i, c)| c == 0 || i as usize >= dim) {
            return Err(Error::InvalidArgument(
                "feature counts must be positive and indices below the dimension".into(),
            ));
        }
        Ok(FeatureVector { entries, dim })
    }

    /// Dense counts to sparse form; zeros are dropped.
    pub fn from_dense(counts: &[u32]) -> Self {
        let entries = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i as u32, c))
            .collect();
        FeatureVector {
            entries,
            dim: counts.len(),
        }
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, index: usize) -> u32 {
        self.entries
            .binary_search_by_key(&(index as u32), |e| e.0)
            .map(|p| self.entries[p].1)
            .unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.1 as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Vocabulary over the pair-documents of a training set.
pub fn build_vocab(
    train_pairs: &[RequirementPair],
    pipeline: &TextPipeline,
    min_df: usize,
) -> Result<Vocabulary> {
    let docs: Vec<Vec<String>> = train_pairs
        .iter()
        .map(|p| pipeline.pair_tokens(p))
        .collect();
    Vocabulary::fit(&docs, min_df)
}

/// Bag of words over the concatenated texts of a pair; out-of-vocabulary
/// tokens are dropped.
pub fn vectorize_pair(
    pair: &RequirementPair,
    pipeline: &TextPipeline,
    vocab: &Vocabulary,
) -> FeatureVector {
    vocab.vectorize(&pipeline.pair_tokens(pair))
}
