//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

#[path = "../../core/tests/common/mod.rs"]
#[allow(dead_code)]
mod common;

use std::fs;
use std::time::{Duration, Instant};

use common::{brute_force_best_split, exact_nb_posterior, nb_cases, spearman};
use reqroi_cli::commands::{cmd_eas1, cmd_eas2, run_eas1, run_eas2};
use reqroi_cli::config::RunConfig;
use reqroi_core::active::{IterationRecord, QueryStrategy};
use reqroi_core::classifiers::{
    ClassMetrics, Dataset, MaxFeatures, ModelKind, ModelSpec, MultinomialNb, RandomForest,
};
use reqroi_core::roi::{
    analyze_curve, analyze_series, benefit_eas1, benefit_eas2, build_curve_eas1, build_curve_eas2,
    cost_eas2, format_dollars, roi, to_cents, BenefitMode, BenefitParams, CostParams, RoiCurve,
};
use reqroi_core::textprep::FeatureVector;

type Outcome = Result<String, String>;

fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs().max(1.0)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(started: Instant, budget: Duration) -> Result<(), String> {
    let took = started.elapsed();
    check(took < budget, || {
        format!("took {took:.1?}, budget {budget:?}")
    })
}

fn formula_fidelity() -> Outcome {
    const REL: f64 = 1e-9;
    let cost = CostParams::default();
    let benefit = BenefitParams::default();
    let b1 = benefit_eas1(&ClassMetrics::from_counts(10, 0, 2, 0), &benefit);
    check(close(b1, 4000.0, REL), || {
        format!("benefit_eas1(TP=10, FN=2) = {b1}")
    })?;
    // (180 * 1.5 + 100 * 1) / 60 * 400
    let c2 = cost_eas2(180, 100, &cost).map_err(|e| e.to_string())?;
    check(close(c2, 7400.0 / 3.0, REL), || {
        format!("cost_eas2(180, 100) = {c2}")
    })?;
    check(
        to_cents(c2) == 246_667 && format_dollars(c2) == "$2,466.67",
        || format_dollars(c2),
    )?;
    let b2 = benefit_eas2(0.65, 0.60, &benefit);
    check(close(b2, 50_000.0, REL), || {
        format!("benefit_eas2(0.60 -> 0.65) = {b2}")
    })?;
    let r = roi(200.0, 100.0).map_err(|e| e.to_string())?;
    check(close(r, 1.0, REL), || format!("roi(200, 100) = {r}"))?;
    Ok(format!(
        "benefit_eas1 {b1}, cost_eas2 {}, benefit_eas2 {b2}, roi {r}",
        format_dollars(c2)
    ))
}

fn nb_oracle() -> Outcome {
    let started = Instant::now();
    let mut compared = 0usize;
    let mut worst = 0.0f64;
    let cases = nb_cases(4);
    for case in &cases {
        let v = case.docs[0].len();
        let x = case
            .docs
            .iter()
            .map(|d| FeatureVector::from_dense(d))
            .collect();
        let data =
            Dataset::new(x, case.labels.clone(), case.n_classes, v).map_err(|e| e.to_string())?;
        let nb = MultinomialNb::fit(&data, case.alpha).map_err(|e| e.to_string())?;
        for q in &case.queries {
            let got = nb
                .predict_proba(&FeatureVector::from_dense(q))
                .map_err(|e| e.to_string())?;
            let want = exact_nb_posterior(&case.docs, &case.labels, case.n_classes, case.alpha, q);
            for (g, w) in got.as_slice().iter().zip(&want) {
                worst = worst.max((g - w).abs());
            }
            compared += 1;
        }
    }
    check(worst <= 1e-12, || format!("max abs deviation {worst:e}"))?;
    within(started, Duration::from_secs(30))?;
    Ok(format!(
        "{} corpora, {compared} posteriors, max deviation {worst:.1e}",
        cases.len()
    ))
}

fn rf_sanity() -> Outcome {
    let started = Instant::now();
    let rows: Vec<Vec<u32>> = (0..10).chain(20..30).map(|v| vec![v]).collect();
    let labels: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
    let x: Vec<FeatureVector> = rows.iter().map(|r| FeatureVector::from_dense(r)).collect();
    let data = Dataset::new(x.clone(), labels.clone(), 2, 1).map_err(|e| e.to_string())?;
    for seed in 0..25 {
        let spec = ModelSpec::random_forest(1)
            .with_max_depth(Some(1))
            .with_max_features(MaxFeatures::All)
            .with_seed(seed);
        let forest = RandomForest::fit(&data, &spec).map_err(|e| e.to_string())?;
        let tree = &forest.trees()[0];
        let (g, f, t) = brute_force_best_split(&rows, &labels, 2, tree.bootstrap())
            .ok_or("single-class bag")?;
        check(g == 0.0 && tree.root_split() == Some((f, t)), || {
            format!(
                "seed {seed}: stump {:?}, brute force ({f}, {t})",
                tree.root_split()
            )
        })?;
    }

    let noisy: Vec<FeatureVector> = (0..120u32)
        .map(|i| FeatureVector::from_dense(&[i % 7, (i * 31) % 11, (i * 17) % 5, i % 3]))
        .collect();
    let noisy_y: Vec<usize> = (0..120).map(|i| (i * 13 % 7) % 3).collect();
    let data = Dataset::new(noisy.clone(), noisy_y, 3, 4).map_err(|e| e.to_string())?;
    let spec = ModelSpec::random_forest(40).with_seed(11);
    let a = RandomForest::fit(&data, &spec).map_err(|e| e.to_string())?;
    let b = RandomForest::fit(&data, &spec).map_err(|e| e.to_string())?;
    for q in &noisy {
        let pa = a.predict_proba(q).map_err(|e| e.to_string())?;
        let pb = b.predict_proba(q).map_err(|e| e.to_string())?;
        let same = pa
            .as_slice()
            .iter()
            .zip(pb.as_slice())
            .all(|(x, y)| x.to_bits() == y.to_bits());
        check(same, || format!("predictions differ at {q:?}"))?;
    }
    within(started, Duration::from_secs(10))?;
    Ok("stump matches brute-force split on 25 bootstraps; 40-tree forest bit-identical".into())
}

fn eas1_config() -> RunConfig {
    let mut config = RunConfig::default();
    config.seed = 7;
    config.corpus.synth.seed = 7;
    config.corpus.synth.n_records = 4400;
    config.corpus.synth.signal_strength = 0.9;
    config
}

fn eas1_shape() -> Outcome {
    let started = Instant::now();
    let config = eas1_config();
    let result = run_eas1(&config).map_err(|e| e.to_string())?;
    let pairs = result.summary.n_pairs;
    check(pairs >= 2000, || format!("only {pairs} balanced pairs"))?;
    let mut notes = Vec::new();
    for kind in [ModelKind::NaiveBayes, ModelKind::RandomForest] {
        let (x, f1): (Vec<f64>, Vec<f64>) = result
            .rows_for(kind)
            .map(|r| (r.fraction, r.dependent.f1))
            .unzip();
        check(x.len() == 8, || {
            format!("{} has {} fractions", kind.short_name(), x.len())
        })?;
        let rho = spearman(&x, &f1);
        check(rho >= 0.8, || {
            format!("{} Spearman {rho:.3}, F1 {f1:.3?}", kind.short_name())
        })?;
        notes.push(format!(
            "{} rho {rho:.3} (F1 {:.3}..{:.3})",
            kind.short_name(),
            f1[0],
            f1[f1.len() - 1]
        ));
    }
    within(started, Duration::from_secs(180))?;
    Ok(format!("{pairs} pairs; {}", notes.join(", ")))
}

/// True if `roi` peaks strictly inside and falls strictly after the peak.
fn interior_then_falling(roi: &[f64]) -> Option<usize> {
    let peak = (0..roi.len()).fold(0, |best, i| if roi[i] > roi[best] { i } else { best });
    let falling = roi[peak..].windows(2).all(|w| w[1] < w[0]);
    (peak > 0 && peak + 1 < roi.len() && falling).then_some(peak)
}

fn roi_peak() -> Outcome {
    const REL: f64 = 1e-9;
    let f1 = |n: f64| 0.9 * (1.0 - (-n / 500.0).exp());
    let cost = CostParams::default();
    let benefit = BenefitParams::default();
    let mut notes = Vec::new();

    let records: Vec<IterationRecord> = (0..=40)
        .map(|i| {
            let n = 180 + 20 * i;
            IterationRecord {
                iteration: i,
                n_train: n,
                n_test: 100,
                f1_requires: f1(n as f64),
                macro_f1: 0.0,
                queried_ids: vec![],
            }
        })
        .collect();
    for mode in [BenefitMode::Cumulative, BenefitMode::Incremental] {
        let curve = build_curve_eas2(&records, &cost, &benefit, mode).map_err(|e| e.to_string())?;
        let want: Vec<f64> = records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let c = (r.n_train as f64 * 1.5 + 100.0) / 60.0 * 400.0;
                let reference = match mode {
                    BenefitMode::Cumulative => records[0].f1_requires,
                    BenefitMode::Incremental => records[i.saturating_sub(1)].f1_requires,
                };
                ((r.f1_requires - reference) * 100.0 * 10_000.0 - c) / c
            })
            .collect();
        check_curve(&curve, &want, REL, &format!("eas2 {mode:?}"))?;
        let peak = analyze_curve(&curve).map_err(|e| e.to_string())?;
        notes.push(format!(
            "eas2 {mode:?} peak at iteration {} (roi {:.4})",
            peak.peak_x, peak.peak_roi
        ));
    }

    // Fraction sweep against 1000 positives with precision = recall = F1.
    let positives = 1000u64;
    let sweep: Vec<(f64, ClassMetrics)> = (1..=8)
        .map(|i| {
            let fraction = i as f64 / 10.0;
            let tp = (f1(fraction * 4586.0) * positives as f64).round() as u64;
            (
                fraction,
                ClassMetrics::from_counts(tp, positives - tp, positives - tp, 0),
            )
        })
        .collect();
    let curve = build_curve_eas1(&sweep, &cost, &benefit).map_err(|e| e.to_string())?;
    let want: Vec<f64> = sweep
        .iter()
        .map(|(fraction, m)| {
            let c = fraction * 4586.0 * 1.5 / 60.0 * 400.0;
            let b = m.tp as f64 * 500.0 - m.fn_ as f64 * 500.0;
            (b - c) / c
        })
        .collect();
    check_curve(&curve, &want, REL, "eas1")?;
    let peak = analyze_curve(&curve).map_err(|e| e.to_string())?;
    notes.push(format!(
        "eas1 peak at fraction {} (roi {:.4})",
        peak.peak_x, peak.peak_roi
    ));
    Ok(notes.join("; "))
}

fn check_curve(curve: &RoiCurve, want: &[f64], rel: f64, name: &str) -> Result<(), String> {
    let got: Vec<f64> = curve.points.iter().map(|p| p.roi).collect();
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        check(close(*g, *w, rel), || {
            format!("{name}: point {i} roi {g} vs {w}")
        })?;
    }
    let peak = interior_then_falling(want).ok_or_else(|| format!("{name}: no interior peak"))?;
    let a = analyze_curve(curve).map_err(|e| e.to_string())?;
    check(
        a.peak_index == peak && close(a.peak_roi, want[peak], rel),
        || format!("{name}: analyze_curve peak {} vs {peak}", a.peak_index),
    )?;
    check(interior_then_falling(&got) == Some(peak), || {
        format!("{name}: curve not falling after peak")
    })
}

fn eas2_comparison() -> Outcome {
    let started = Instant::now();
    let mut passes = 0;
    let mut detail = Vec::new();
    for seed in 1..=10u64 {
        let mut config = RunConfig::default();
        config.seed = seed;
        config.corpus.synth.seed = seed;
        // A larger corpus keeps the held-out F1 estimate stable.
        config.corpus.synth.n_records = 12_000;
        let result = run_eas2(&config).map_err(|e| e.to_string())?;
        let first_hit = |strategy| {
            let run = &result.run_for(strategy).expect("strategy ran").run;
            run.records
                .iter()
                .find(|r| r.f1_requires >= 0.8)
                .map(|r| r.iteration)
        };
        for s in &result.summary.strategies {
            check(s.final_n_train == 580 && !s.truncated, || {
                format!("seed {seed}: {s:?}")
            })?;
        }
        let mm = first_hit(QueryStrategy::MinMargin);
        let base = first_hit(QueryStrategy::Random);
        let ok = match (mm, base) {
            (Some(m), Some(b)) => m <= b,
            (Some(_), None) => true,
            (None, _) => false,
        };
        passes += usize::from(ok);
        let show = |h: Option<usize>| h.map(|i| i.to_string()).unwrap_or_else(|| "-".into());
        detail.push(format!("{seed}:{}/{}", show(mm), show(base)));
    }
    let summary = format!(
        "{passes}/10 seeds (minmargin/random first iteration at F1 >= 0.8: {})",
        detail.join(" ")
    );
    check(passes >= 8, || summary.clone())?;
    within(started, Duration::from_secs(300))?;
    Ok(summary)
}

fn break_even() -> Outcome {
    let a = analyze_series(&[(1.0, -0.5), (2.0, 0.2)]).map_err(|e| e.to_string())?;
    let x = a.break_even.ok_or("no break-even found")?;
    check(close(x, 1.0 + 0.5 / 0.7, 1e-9), || {
        format!("break-even {x}")
    })?;
    let b = analyze_series(&[(1.0, -0.5), (2.0, -0.2), (3.0, -0.9)]).map_err(|e| e.to_string())?;
    check(b.break_even.is_none(), || {
        format!("all-negative curve gave {:?}", b.break_even)
    })?;
    Ok(format!("break-even {x:.12}; all-negative: none"))
}

fn determinism() -> Outcome {
    let tmp = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let mut config = RunConfig::parse(
        r#"
seed = 5
[corpus.synth]
n_records = 1500
seed = 5
[classifiers]
cv_folds = 3
rf_n_trees = [20]
[eas1]
fractions = [0.2, 0.5, 0.8]
[active]
seed_per_class = 20
batch_size = 10
iterations = 4
rf_n_trees = 30
"#,
    )
    .map_err(|e| e.to_string())?;
    let mut compared = 0;
    for study in ["eas1", "eas2"] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            config.out = Some(tmp.path().join(format!("{study}_{run}")));
            let out = match study {
                "eas1" => cmd_eas1(&config),
                _ => cmd_eas2(&config),
            }
            .map_err(|e| e.to_string())?;
            outputs.push(out.files);
        }
        check(outputs[0].len() == outputs[1].len(), || {
            format!("{study}: different file sets")
        })?;
        for (a, b) in outputs[0].iter().zip(&outputs[1]) {
            let same = a.file_name() == b.file_name() && fs::read(a).ok() == fs::read(b).ok();
            check(same, || {
                format!("{} differs from {}", a.display(), b.display())
            })?;
            compared += 1;
        }
    }
    Ok(format!("{compared} files byte-identical across reruns"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("formula fidelity", formula_fidelity),
        ("NB oracle equivalence", nb_oracle),
        ("RF sanity", rf_sanity),
        ("training-fraction F1 trend", eas1_shape),
        ("ROI peak on analytic trajectory", roi_peak),
        ("MinMargin vs baseline", eas2_comparison),
        ("break-even", break_even),
        ("end-to-end determinism", determinism),
    ];
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("AC{}", i + 1);
        if !only.is_empty() && !only.iter().any(|o| o == &label) {
            continue;
        }
        let started = Instant::now();
        let outcome = run();
        let took = started.elapsed();
        match outcome {
            Ok(note) => println!("{label} PASS {name} [{took:.1?}] {note}"),
            Err(why) => {
                failed += 1;
                println!("{label} FAIL {name} [{took:.1?}] {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
