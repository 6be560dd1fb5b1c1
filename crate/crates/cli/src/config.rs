//! Run configuration: one TOML file with a section per module.

use std::path::{Path, PathBuf};

use reqroi_core::active::QueryStrategy;
use reqroi_core::classifiers::{MaxFeatures, ModelKind, ModelSpec};
use reqroi_core::corpus::fetch::FetchConfig;
use reqroi_core::corpus::SynthConfig;
use reqroi_core::roi::{BenefitMode, FlatParams, RoiParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    pub out: Option<PathBuf>,
    pub corpus: CorpusSection,
    pub textprep: TextprepSection,
    pub classifiers: ClassifiersSection,
    pub eas1: Eas1Section,
    pub active: ActiveSection,
    pub roi: FlatParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            out: None,
            corpus: CorpusSection::default(),
            textprep: TextprepSection::default(),
            classifiers: ClassifiersSection::default(),
            eas1: Eas1Section::default(),
            active: ActiveSection::default(),
            roi: FlatParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    /// Records CSV. Without `records` or `pairs` the synthetic corpus is used.
    pub records: Option<PathBuf>,
    /// Labeled pairs CSV; skips pair construction.
    pub pairs: Option<PathBuf>,
    pub independent_ratio: f64,
    pub min_words: usize,
    pub train_ratio: f64,
    pub synth: SynthConfig,
    pub fetch: FetchConfig,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            records: None,
            pairs: None,
            independent_ratio: 2.0,
            min_words: 3,
            train_ratio: 0.8,
            synth: SynthConfig::default(),
            fetch: FetchConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextprepSection {
    pub min_df: usize,
    pub stemming: bool,
    /// Replaces the built-in stopword list.
    pub stopwords: Option<PathBuf>,
}

impl Default for TextprepSection {
    fn default() -> Self {
        TextprepSection {
            min_df: 1,
            stemming: true,
            stopwords: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifiersSection {
    pub cv_folds: usize,
    pub nb_alpha: Vec<f64>,
    pub rf_n_trees: Vec<usize>,
    /// 0 means unlimited.
    pub rf_max_depth: Vec<usize>,
    /// `sqrt`, `all` or a feature count.
    pub rf_max_features: String,
    pub rf_min_samples_split: usize,
}

impl Default for ClassifiersSection {
    fn default() -> Self {
        ClassifiersSection {
            cv_folds: 10,
            nb_alpha: vec![0.1, 0.5, 1.0],
            rf_n_trees: vec![50, 100],
            rf_max_depth: vec![8, 0],
            rf_max_features: "sqrt".into(),
            rf_min_samples_split: 2,
        }
    }
}

impl ClassifiersSection {
    pub fn max_features(&self) -> Result<MaxFeatures, CliError> {
        parse_max_features(&self.rf_max_features)
    }

    /// Grid for one learner, in declaration order (ties resolve to the
    /// earliest entry).
    pub fn grid(&self, kind: ModelKind, seed: u64) -> Result<Vec<ModelSpec>, CliError> {
        let grid: Vec<ModelSpec> = match kind {
            ModelKind::NaiveBayes => self
                .nb_alpha
                .iter()
                .map(|&a| ModelSpec::naive_bayes(a))
                .collect(),
            ModelKind::RandomForest => {
                let rule = self.max_features()?;
                let mut out = Vec::new();
                for &n in &self.rf_n_trees {
                    for &d in &self.rf_max_depth {
                        let mut spec = ModelSpec::random_forest(n)
                            .with_max_depth((d > 0).then_some(d))
                            .with_max_features(rule);
                        spec.rf_min_samples_split = self.rf_min_samples_split;
                        out.push(spec);
                    }
                }
                out
            }
        };
        if grid.is_empty() {
            return Err(CliError::config(format!(
                "empty {} tuning grid",
                kind.short_name()
            )));
        }
        grid.into_iter()
            .map(|s| {
                let s = s.with_seed(seed);
                s.validate().map_err(|e| CliError::config(e.to_string()))?;
                Ok(s)
            })
            .collect()
    }
}

fn parse_max_features(raw: &str) -> Result<MaxFeatures, CliError> {
    match raw.to_ascii_lowercase().as_str() {
        "sqrt" => Ok(MaxFeatures::Sqrt),
        "all" => Ok(MaxFeatures::All),
        other => other
            .parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .map(MaxFeatures::Fixed)
            .ok_or_else(|| CliError::config(format!("invalid rf_max_features `{raw}`"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Eas1Section {
    pub fractions: Vec<f64>,
    pub learners: Vec<ModelKind>,
}

impl Default for Eas1Section {
    fn default() -> Self {
        Eas1Section {
            fractions: (1..=8).map(|i| i as f64 / 10.0).collect(),
            learners: vec![ModelKind::NaiveBayes, ModelKind::RandomForest],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActiveSection {
    pub seed_per_class: usize,
    pub batch_size: usize,
    pub iterations: usize,
    /// Compared against the Random baseline.
    pub strategy: QueryStrategy,
    /// Share of pairs held out for testing before the pool is formed.
    pub test_ratio: f64,
    pub rf_n_trees: usize,
    /// 0 means unlimited.
    pub rf_max_depth: usize,
    pub rf_max_features: String,
    pub mode: BenefitMode,
}

impl Default for ActiveSection {
    fn default() -> Self {
        ActiveSection {
            seed_per_class: 60,
            batch_size: 20,
            iterations: 20,
            strategy: QueryStrategy::MinMargin,
            test_ratio: 0.2,
            rf_n_trees: 100,
            rf_max_depth: 0,
            rf_max_features: "sqrt".into(),
            mode: BenefitMode::Cumulative,
        }
    }
}

impl ActiveSection {
    pub fn model_spec(&self, seed: u64) -> Result<ModelSpec, CliError> {
        let spec = ModelSpec::random_forest(self.rf_n_trees)
            .with_max_depth((self.rf_max_depth > 0).then_some(self.rf_max_depth))
            .with_max_features(parse_max_features(&self.rf_max_features)?)
            .with_seed(seed);
        spec.validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        Ok(spec)
    }
}

/// Command-line values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub strategy: Option<QueryStrategy>,
    pub mode: Option<BenefitMode>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))
    }

    /// Loads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = RunConfig::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut config.corpus.records,
            &mut config.corpus.pairs,
            &mut config.textprep.stopwords,
            &mut config.out,
        ] {
            if let Some(inner) = p.as_mut() {
                if inner.is_relative() {
                    *inner = base.join(&*inner);
                }
            }
        }
        Ok(config)
    }

    /// `--seed` replaces both the run seed and the synthetic corpus seed.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
            self.corpus.synth.seed = seed;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(s) = o.strategy {
            self.active.strategy = s;
        }
        if let Some(m) = o.mode {
            self.active.mode = m;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.corpus;
        if c.records.is_some() && c.pairs.is_some() {
            return Err(CliError::config(
                "set at most one of corpus.records and corpus.pairs",
            ));
        }
        if !(c.independent_ratio.is_finite() && c.independent_ratio > 0.0) {
            return Err(CliError::config(
                "corpus.independent_ratio must be positive",
            ));
        }
        if c.min_words == 0 {
            return Err(CliError::config("corpus.min_words must be at least 1"));
        }
        if !(c.train_ratio > 0.0 && c.train_ratio < 1.0) {
            return Err(CliError::config("corpus.train_ratio must lie in (0, 1)"));
        }
        c.synth
            .validate()
            .map_err(|e| CliError::config(format!("corpus.synth: {e}")))?;
        for p in [&c.records, &c.pairs, &self.textprep.stopwords]
            .into_iter()
            .flatten()
        {
            if !p.exists() {
                return Err(CliError::config(format!("file not found: {}", p.display())));
            }
        }
        if self.textprep.min_df == 0 {
            return Err(CliError::config("textprep.min_df must be at least 1"));
        }
        if self.classifiers.cv_folds < 2 {
            return Err(CliError::config("classifiers.cv_folds must be at least 2"));
        }
        let f = &self.eas1.fractions;
        if f.is_empty() {
            return Err(CliError::config("eas1.fractions is empty"));
        }
        if f.iter().any(|&x| !(x > 0.0 && x <= 1.0)) || f.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::config(
                "eas1.fractions must be strictly increasing within (0, 1]",
            ));
        }
        if self.eas1.learners.is_empty() {
            return Err(CliError::config("eas1.learners is empty"));
        }
        for kind in &self.eas1.learners {
            self.classifiers.grid(*kind, self.seed)?;
        }
        let a = &self.active;
        if a.seed_per_class == 0 || a.batch_size == 0 {
            return Err(CliError::config(
                "active.seed_per_class and active.batch_size must be positive",
            ));
        }
        if !(a.test_ratio > 0.0 && a.test_ratio < 1.0) {
            return Err(CliError::config("active.test_ratio must lie in (0, 1)"));
        }
        a.model_spec(self.seed)?;
        self.roi_params()?;
        Ok(())
    }

    pub fn roi_params(&self) -> Result<RoiParams, CliError> {
        RoiParams::try_from(self.roi.clone()).map_err(|e| CliError::config(format!("roi: {e}")))
    }

    /// TOML rendering of the effective config, without the output directory
    /// so that runs into different directories snapshot identically.
    pub fn snapshot(&self) -> Result<String, CliError> {
        let mut copy = self.clone();
        copy.out = None;
        toml::to_string(&copy).map_err(|e| CliError::runtime(format!("cannot render config: {e}")))
    }
}
