//! Subcommand implementations. Each `run_*` function computes results in
//! memory; the matching `cmd_*` writes them under the output directory.

mod eas1;
mod eas2;
mod prepare;
mod report;

use std::fs;
use std::path::{Path, PathBuf};

use reqroi_core::classifiers::Dataset;
use reqroi_core::corpus::{
    build_pairs, filter_and_binarize, load_records_path, read_pairs_path, synth_corpus,
    LabelScheme, RequirementPair, RequirementRecord,
};
use reqroi_core::textprep::{
    default_stopwords, load_stopwords, vectorize_pair, TextPipeline, Vocabulary,
};

use crate::config::RunConfig;
use crate::error::CliError;

pub use eas1::{cmd_eas1, run_eas1, training_subsample, Eas1Result, Eas1Row, LearnerSummary};
pub use eas2::{cmd_eas2, run_eas2, Eas2Result, StrategyRun, StrategySummary};
pub use prepare::{cmd_fetch, cmd_prepare, cmd_synth};
pub use report::{cmd_report, read_series, render_table, Series, SeriesSummary};

/// Files written by a command, in write order.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl RunOutput {
    fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
        Ok(RunOutput {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(path);
        Ok(())
    }

    fn write_snapshot(&mut self, config: &RunConfig) -> Result<(), CliError> {
        let text = config.snapshot()?;
        self.write("config_snapshot.toml", text.as_bytes())
    }

    fn write_json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::runtime(format!("cannot encode {name}: {e}")))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

pub(crate) fn out_dir(config: &RunConfig) -> Result<PathBuf, CliError> {
    config
        .out
        .clone()
        .ok_or_else(|| CliError::config("no output directory; pass --out or set `out`"))
}

pub(crate) fn text_pipeline(config: &RunConfig) -> Result<TextPipeline, CliError> {
    let stopwords = match &config.textprep.stopwords {
        Some(path) => {
            let file = fs::File::open(path)
                .map_err(|e| CliError::config(format!("cannot open {}: {e}", path.display())))?;
            load_stopwords(std::io::BufReader::new(file))?
        }
        None => default_stopwords(),
    };
    Ok(TextPipeline::new(stopwords, config.textprep.stemming))
}

/// Records from the configured file, or the synthetic corpus.
pub(crate) fn load_corpus_records(config: &RunConfig) -> Result<Vec<RequirementRecord>, CliError> {
    match &config.corpus.records {
        Some(path) => {
            load_records_path(path).map_err(|e| CliError::from(e).context(path.display()))
        }
        None => Ok(synth_corpus(&config.corpus.synth)?),
    }
}

/// Labeled pairs after the word-count filter; `binary` collapses the
/// dependency types.
pub(crate) fn load_pairs(
    config: &RunConfig,
    binary: bool,
) -> Result<(Vec<RequirementPair>, Vec<String>), CliError> {
    let (pairs, warnings) = match &config.corpus.pairs {
        Some(path) => (
            read_pairs_path(path).map_err(|e| CliError::from(e).context(path.display()))?,
            Vec::new(),
        ),
        None => {
            let records = load_corpus_records(config)?;
            let build = build_pairs(&records, config.corpus.independent_ratio, config.seed)?;
            (build.pairs, build.warnings)
        }
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    let filtered = filter_and_binarize(&pairs, config.corpus.min_words, binary);
    if filtered.is_empty() {
        return Err(CliError::data(format!(
            "no pairs left after dropping texts under {} words",
            config.corpus.min_words
        )));
    }
    Ok((filtered, warnings))
}

pub(crate) fn to_dataset(
    pairs: &[RequirementPair],
    scheme: LabelScheme,
    pipeline: &TextPipeline,
    vocab: &Vocabulary,
) -> Result<Dataset, CliError> {
    let x = pairs
        .iter()
        .map(|p| vectorize_pair(p, pipeline, vocab))
        .collect();
    let y = pairs
        .iter()
        .map(|p| {
            scheme.index_of(p.label).ok_or_else(|| {
                CliError::data(format!(
                    "label {} outside the {scheme:?} scheme",
                    p.label.as_str()
                ))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset::new(x, y, scheme.n_classes(), vocab.len())?)
}

/// Shortest round-trip rendering for optional CSV cells.
pub(crate) fn opt_cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}
