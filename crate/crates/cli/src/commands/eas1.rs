use rand::seq::SliceRandom;
use rayon::prelude::*;
use reqroi_core::classifiers::{
    cross_validate_tune, evaluate, train, ClassMetrics, ModelKind, ModelSpec,
};
use reqroi_core::corpus::{apportion, balance_and_split, LabelScheme, RequirementPair};
use reqroi_core::roi::{analyze_curve, build_curve_eas1, write_curve, RoiCurve};
use reqroi_core::seed::{stream_rng, STREAM_SUBSAMPLE};
use reqroi_core::textprep::build_vocab;
use serde::Serialize;

use super::{load_pairs, out_dir, text_pipeline, to_dataset, RunOutput};
use crate::config::RunConfig;
use crate::error::CliError;

const SWEEP_COLUMNS: [&str; 17] = [
    "learner",
    "fraction",
    "n_train",
    "n_test",
    "tp",
    "fp",
    "fn",
    "tn",
    "precision",
    "recall",
    "f1",
    "macro_f1",
    "cost",
    "benefit",
    "roi",
    "cv_macro_f1",
    "spec",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eas1Row {
    pub learner: ModelKind,
    pub fraction: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Scores of the DEPENDENT class.
    pub dependent: ClassMetrics,
    pub macro_f1: f64,
    pub cost: f64,
    pub benefit: f64,
    pub roi: f64,
    pub cv_macro_f1: f64,
    pub spec: ModelSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnerSummary {
    pub learner: ModelKind,
    pub peak_fraction: f64,
    pub peak_roi: f64,
    pub peak_f1: f64,
    pub break_even: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eas1Summary {
    pub study: &'static str,
    pub seed: u64,
    pub n_pairs: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub learners: Vec<LearnerSummary>,
}

#[derive(Clone, Debug)]
pub struct Eas1Result {
    /// Grouped by learner in config order, then by fraction.
    pub rows: Vec<Eas1Row>,
    pub curves: Vec<(ModelKind, RoiCurve)>,
    pub summary: Eas1Summary,
}

impl Eas1Result {
    pub fn rows_for(&self, learner: ModelKind) -> impl Iterator<Item = &Eas1Row> {
        self.rows.iter().filter(move |r| r.learner == learner)
    }
}

/// Nested class-stratified prefixes: one seeded permutation per class, of
/// which each fraction keeps its largest-remainder share. Larger fractions
/// therefore contain every smaller one.
pub fn training_subsample(
    train: &[RequirementPair],
    fraction: f64,
    seed: u64,
) -> Vec<RequirementPair> {
    let mut labels: Vec<_> = train.iter().map(|p| p.label).collect();
    labels.sort();
    labels.dedup();
    let mut rng = stream_rng(seed, STREAM_SUBSAMPLE);
    let groups: Vec<Vec<&RequirementPair>> = labels
        .iter()
        .map(|&l| {
            let mut members: Vec<&RequirementPair> =
                train.iter().filter(|p| p.label == l).collect();
            members.shuffle(&mut rng);
            members
        })
        .collect();
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let shares = apportion(&sizes, fraction);
    let mut out: Vec<RequirementPair> = groups
        .iter()
        .zip(shares)
        .flat_map(|(g, n)| g[..n].iter().map(|p| (*p).clone()))
        .collect();
    out.sort_by(|a, b| a.key().cmp(&b.key()));
    out
}

fn spec_label(spec: &ModelSpec) -> String {
    match spec.kind {
        ModelKind::NaiveBayes => format!("alpha={}", spec.nb_alpha),
        ModelKind::RandomForest => format!(
            "trees={} depth={} features={:?}",
            spec.rf_n_trees,
            spec.rf_max_depth
                .map(|d| d.to_string())
                .unwrap_or_else(|| "none".into()),
            spec.rf_max_features
        )
        .to_lowercase(),
    }
}

/// Balanced binary sweep over the configured training fractions.
pub fn run_eas1(config: &RunConfig) -> Result<Eas1Result, CliError> {
    config.validate()?;
    let params = config.roi_params()?;
    let pipeline = text_pipeline(config)?;
    let (pairs, _) = load_pairs(config, true)?;
    let split = balance_and_split(&pairs, config.corpus.train_ratio, config.seed)?;
    let scheme = LabelScheme::Binary;
    let dependent = scheme
        .index_of(reqroi_core::corpus::DependencyLabel::Dependent)
        .expect("binary scheme has DEPENDENT");

    let k = config.classifiers.cv_folds;
    let smallest = config.eas1.fractions[0];
    let subsample = training_subsample(&split.train, smallest, config.seed);
    let per_class = subsample
        .iter()
        .filter(|p| p.label.is_dependent())
        .count()
        .min(subsample.iter().filter(|p| !p.label.is_dependent()).count());
    if per_class < k {
        let needed = (k as f64 / (smallest * config.corpus.train_ratio)).ceil() as usize
            * scheme.n_classes();
        return Err(CliError::data(format!(
            "corpus too small for fraction {smallest}: {} balanced pairs give {per_class} per class, \
             {k}-fold tuning needs at least {needed} balanced pairs",
            split.train.len() + split.test.len()
        )));
    }

    let jobs: Vec<(usize, ModelKind, f64)> = config
        .eas1
        .learners
        .iter()
        .enumerate()
        .flat_map(|(i, &kind)| config.eas1.fractions.iter().map(move |&f| (i, kind, f)))
        .collect();
    let results =
        jobs.par_iter()
            .map(
                |&(_, kind, fraction)| -> Result<
                    (ModelKind, f64, usize, ClassMetrics, f64, f64, ModelSpec),
                    CliError,
                > {
                    let train_pairs = training_subsample(&split.train, fraction, config.seed);
                    let vocab = build_vocab(&train_pairs, &pipeline, config.textprep.min_df)?;
                    let train_set = to_dataset(&train_pairs, scheme, &pipeline, &vocab)?;
                    let test_set = to_dataset(&split.test, scheme, &pipeline, &vocab)?;
                    let grid = config.classifiers.grid(kind, config.seed)?;
                    let tuned =
                        cross_validate_tune(&grid, &train_set, k, config.seed).map_err(|e| {
                            CliError::from(e)
                                .context(format!("{} at fraction {fraction}", kind.short_name()))
                        })?;
                    let model = train(&train_set, &tuned.best)?;
                    let metrics = evaluate(&model, &test_set)?;
                    let cv = tuned.mean_macro_f1[tuned.best_index];
                    Ok((
                        kind,
                        fraction,
                        train_pairs.len(),
                        metrics.class(dependent).clone(),
                        metrics.macro_f1,
                        cv,
                        tuned.best,
                    ))
                },
            )
            .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::with_capacity(results.len());
    let mut curves = Vec::new();
    let mut learners = Vec::new();
    for &kind in &config.eas1.learners {
        let mine: Vec<_> = results.iter().filter(|r| r.0 == kind).collect();
        let sweep: Vec<(f64, ClassMetrics)> = mine.iter().map(|r| (r.1, r.3.clone())).collect();
        let curve = build_curve_eas1(&sweep, &params.cost, &params.benefit)?;
        for (r, point) in mine.iter().zip(&curve.points) {
            rows.push(Eas1Row {
                learner: kind,
                fraction: r.1,
                n_train: r.2,
                n_test: split.test.len(),
                dependent: r.3.clone(),
                macro_f1: r.4,
                cost: point.cost,
                benefit: point.benefit,
                roi: point.roi,
                cv_macro_f1: r.5,
                spec: r.6.clone(),
            });
        }
        let analysis = analyze_curve(&curve)?;
        learners.push(LearnerSummary {
            learner: kind,
            peak_fraction: analysis.peak_x,
            peak_roi: analysis.peak_roi,
            peak_f1: curve.points[analysis.peak_index].f1.unwrap_or(0.0),
            break_even: analysis.break_even,
        });
        curves.push((kind, curve));
    }
    let summary = Eas1Summary {
        study: "eas1",
        seed: config.seed,
        n_pairs: split.train.len() + split.test.len(),
        n_train: split.train.len(),
        n_test: split.test.len(),
        learners,
    };
    Ok(Eas1Result {
        rows,
        curves,
        summary,
    })
}

fn sweep_csv(rows: &[Eas1Row]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        let m = &r.dependent;
        w.write_record([
            r.learner.short_name().to_string(),
            r.fraction.to_string(),
            r.n_train.to_string(),
            r.n_test.to_string(),
            m.tp.to_string(),
            m.fp.to_string(),
            m.fn_.to_string(),
            m.tn.to_string(),
            m.precision.to_string(),
            m.recall.to_string(),
            m.f1.to_string(),
            r.macro_f1.to_string(),
            r.cost.to_string(),
            r.benefit.to_string(),
            r.roi.to_string(),
            r.cv_macro_f1.to_string(),
            spec_label(&r.spec),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::runtime(e.to_string()))
}

pub fn cmd_eas1(config: &RunConfig) -> Result<RunOutput, CliError> {
    let dir = out_dir(config)?;
    let result = run_eas1(config)?;
    let mut out = RunOutput::create(&dir)?;
    out.write_snapshot(config)?;
    out.write("sweep.csv", &sweep_csv(&result.rows)?)?;
    for (kind, curve) in &result.curves {
        let mut buf = Vec::new();
        write_curve(&mut buf, curve)?;
        out.write(
            &format!("roi_eas1_{}.csv", kind.short_name().to_lowercase()),
            &buf,
        )?;
    }
    out.write_json("summary.json", &result.summary)?;
    Ok(out)
}
