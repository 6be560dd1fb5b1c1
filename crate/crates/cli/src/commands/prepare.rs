use std::collections::BTreeMap;
use std::path::Path;

use reqroi_core::corpus::fetch::{fetch_records, FixtureTransport, Transport};
use reqroi_core::corpus::{
    balance_and_split, filter_and_binarize, synth_corpus, write_pairs, write_records,
};
use serde::Serialize;

use super::{load_corpus_records, load_pairs, out_dir, RunOutput};
use crate::config::RunConfig;
use crate::error::CliError;

/// Writes the synthetic corpus as `records.csv`.
pub fn cmd_synth(config: &RunConfig) -> Result<RunOutput, CliError> {
    config
        .corpus
        .synth
        .validate()
        .map_err(|e| CliError::config(format!("corpus.synth: {e}")))?;
    let dir = out_dir(config)?;
    let records = synth_corpus(&config.corpus.synth)?;
    let mut buf = Vec::new();
    write_records(&mut buf, &records)?;
    let mut out = RunOutput::create(&dir)?;
    out.write_snapshot(config)?;
    out.write("records.csv", &buf)?;
    Ok(out)
}

/// Pulls records from a Bugzilla-style endpoint, or from a recorded
/// response when `fixture` is given.
pub fn cmd_fetch(config: &RunConfig, fixture: Option<&Path>) -> Result<RunOutput, CliError> {
    let dir = out_dir(config)?;
    let transport: Box<dyn Transport> = match fixture {
        Some(path) => Box::new(FixtureTransport::from_file(path).map_err(|e| {
            CliError::config(format!("cannot read fixture {}: {e}", path.display()))
        })?),
        None => live_transport()?,
    };
    let records = fetch_records(&config.corpus.fetch, transport.as_ref())?;
    if records.is_empty() {
        return Err(CliError::data("endpoint returned no records"));
    }
    let mut buf = Vec::new();
    write_records(&mut buf, &records)?;
    let mut out = RunOutput::create(&dir)?;
    out.write("records.csv", &buf)?;
    Ok(out)
}

#[cfg(feature = "http")]
fn live_transport() -> Result<Box<dyn Transport>, CliError> {
    Ok(Box::new(reqroi_core::corpus::fetch::HttpTransport))
}

#[cfg(not(feature = "http"))]
fn live_transport() -> Result<Box<dyn Transport>, CliError> {
    Err(CliError::config(
        "built without the `http` feature; pass --fixture <file>",
    ))
}

#[derive(Serialize)]
struct PrepareSummary {
    seed: u64,
    records: Option<usize>,
    label_counts: BTreeMap<&'static str, usize>,
    n_train: usize,
    n_test: usize,
    warnings: Vec<String>,
}

/// Builds and filters labeled pairs (`pairs.csv`), then the balanced binary
/// split used by the training-fraction study (`train.csv`, `test.csv`).
pub fn cmd_prepare(config: &RunConfig) -> Result<RunOutput, CliError> {
    config.validate()?;
    let dir = out_dir(config)?;
    let records = match config.corpus.pairs {
        Some(_) => None,
        None => Some(load_corpus_records(config)?.len()),
    };
    let (pairs, warnings) = load_pairs(config, false)?;
    let binary = filter_and_binarize(&pairs, 1, true);
    let split = balance_and_split(&binary, config.corpus.train_ratio, config.seed)?;
    let mut label_counts = BTreeMap::new();
    for p in &pairs {
        *label_counts.entry(p.label.as_str()).or_default() += 1;
    }
    let mut out = RunOutput::create(&dir)?;
    out.write_snapshot(config)?;
    for (name, set) in [
        ("pairs.csv", &pairs),
        ("train.csv", &split.train),
        ("test.csv", &split.test),
    ] {
        let mut buf = Vec::new();
        write_pairs(&mut buf, set)?;
        out.write(name, &buf)?;
    }
    let summary = PrepareSummary {
        seed: config.seed,
        records,
        label_counts,
        n_train: split.train.len(),
        n_test: split.test.len(),
        warnings,
    };
    out.write_json("summary.json", &summary)?;
    Ok(out)
}
