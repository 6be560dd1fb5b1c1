use rayon::prelude::*;
use reqroi_core::active::{
    run_learning, write_iterations, ALConfig, ActiveDataset, LearningRun, QueryStrategy,
};
use reqroi_core::corpus::{stratified_split, DependencyLabel, LabelScheme};
use reqroi_core::roi::{analyze_curve, build_curve_eas2, write_curve, BenefitMode, RoiCurve};
use reqroi_core::textprep::build_vocab;
use serde::Serialize;

use super::{load_pairs, out_dir, text_pipeline, to_dataset, RunOutput};
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Clone, Debug)]
pub struct StrategyRun {
    pub run: LearningRun,
    /// Absent when fewer than two iterations were recorded.
    pub curve: Option<RoiCurve>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrategySummary {
    pub strategy: QueryStrategy,
    pub iterations_run: usize,
    pub final_n_train: usize,
    pub final_f1_requires: f64,
    pub peak_iteration: Option<usize>,
    pub peak_roi: Option<f64>,
    pub peak_f1_requires: Option<f64>,
    pub break_even: Option<f64>,
    pub oracle_queries: usize,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eas2Summary {
    pub study: &'static str,
    pub seed: u64,
    pub mode: BenefitMode,
    pub n_pool: usize,
    pub n_test: usize,
    pub strategies: Vec<StrategySummary>,
}

#[derive(Clone, Debug)]
pub struct Eas2Result {
    pub runs: Vec<StrategyRun>,
    pub summary: Eas2Summary,
}

impl Eas2Result {
    pub fn run_for(&self, strategy: QueryStrategy) -> Option<&StrategyRun> {
        self.runs.iter().find(|r| r.run.strategy == strategy)
    }
}

/// The configured strategy and the Random baseline over one shared seed
/// set and test set.
pub fn run_eas2(config: &RunConfig) -> Result<Eas2Result, CliError> {
    config.validate()?;
    let params = config.roi_params()?;
    let pipeline = text_pipeline(config)?;
    let (pairs, _) = load_pairs(config, false)?;
    let scheme = LabelScheme::infer(pairs.iter().map(|p| p.label))?;
    let target = match scheme {
        LabelScheme::Ternary => DependencyLabel::Requires,
        LabelScheme::Binary => DependencyLabel::Dependent,
    };
    let split = stratified_split(&pairs, 1.0 - config.active.test_ratio, config.seed)?;
    // Pool texts are visible to the learner; only their labels are gated.
    let vocab = build_vocab(&split.train, &pipeline, config.textprep.min_df)?;
    let pool = to_dataset(&split.train, scheme, &pipeline, &vocab)?;
    let test = to_dataset(&split.test, scheme, &pipeline, &vocab)?;
    let dataset = ActiveDataset::new(pool, test)?;

    let mut strategies = vec![config.active.strategy];
    if config.active.strategy != QueryStrategy::Random {
        strategies.push(QueryStrategy::Random);
    }
    let spec = config.active.model_spec(config.seed)?;
    let mode = config.active.mode;
    let runs = strategies
        .par_iter()
        .map(|&strategy| -> Result<StrategyRun, CliError> {
            let al = ALConfig {
                seed_per_class: config.active.seed_per_class,
                batch_size: config.active.batch_size,
                iterations: config.active.iterations,
                strategy,
                model_spec: spec.clone(),
                seed: config.seed,
                target_class: scheme.index_of(target).expect("target belongs to scheme"),
            };
            let run =
                run_learning(&dataset, &al).map_err(|e| CliError::from(e).context(strategy))?;
            let curve = if run.records.len() >= 2 {
                Some(build_curve_eas2(
                    &run.records,
                    &params.cost,
                    &params.benefit,
                    mode,
                )?)
            } else {
                None
            };
            Ok(StrategyRun { run, curve })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let strategies = runs
        .iter()
        .map(|r| -> Result<StrategySummary, CliError> {
            let last = r
                .run
                .records
                .last()
                .expect("seed iteration always recorded");
            let analysis = r.curve.as_ref().map(analyze_curve).transpose()?;
            Ok(StrategySummary {
                strategy: r.run.strategy,
                iterations_run: r.run.records.len() - 1,
                final_n_train: last.n_train,
                final_f1_requires: last.f1_requires,
                peak_iteration: analysis
                    .as_ref()
                    .map(|a| r.run.records[a.peak_index].iteration),
                peak_roi: analysis.as_ref().map(|a| a.peak_roi),
                peak_f1_requires: analysis
                    .as_ref()
                    .map(|a| r.run.records[a.peak_index].f1_requires),
                break_even: analysis.and_then(|a| a.break_even),
                oracle_queries: r.run.oracle_queries,
                truncated: r.run.truncated,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let summary = Eas2Summary {
        study: "eas2",
        seed: config.seed,
        mode,
        n_pool: dataset.pool_len(),
        n_test: dataset.test().len(),
        strategies,
    };
    Ok(Eas2Result { runs, summary })
}

pub fn cmd_eas2(config: &RunConfig) -> Result<RunOutput, CliError> {
    let dir = out_dir(config)?;
    let result = run_eas2(config)?;
    let mut out = RunOutput::create(&dir)?;
    out.write_snapshot(config)?;
    for r in &result.runs {
        let name = r.run.strategy.name().to_lowercase();
        let mut buf = Vec::new();
        write_iterations(&mut buf, &r.run.records)?;
        out.write(&format!("iterations_{name}.csv"), &buf)?;
        if let Some(curve) = &r.curve {
            let mut buf = Vec::new();
            write_curve(&mut buf, curve)?;
            out.write(&format!("roi_eas2_{name}.csv"), &buf)?;
        }
    }
    out.write_json("summary.json", &result.summary)?;
    Ok(out)
}
