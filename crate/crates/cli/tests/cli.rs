use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use reqroi_cli::commands::{cmd_report, run_eas1, run_eas2};
use reqroi_cli::config::RunConfig;
use reqroi_core::classifiers::ModelKind;
use tempfile::TempDir;

const SMALL: &str = r#"
[corpus.synth]
n_records = 900

[classifiers]
cv_folds = 3
nb_alpha = [1.0]
rf_n_trees = [10]
rf_max_depth = [0]

[eas1]
fractions = [0.2, 0.4]

[active]
seed_per_class = 10
batch_size = 5
iterations = 2
rf_n_trees = 10
"#;

fn reqroi(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reqroi"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn unknown_config_key_exits_with_config_code() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[active]\nbatch = 3\n");
    let out = reqroi(&["eas2", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("batch"));
}

#[test]
fn invalid_values_exit_with_config_code() {
    let tmp = TempDir::new().unwrap();
    for text in [
        "[eas1]\nfractions = [0.4, 0.2]\n",
        "[classifiers]\ncv_folds = 1\n",
        "[roi]\nc_dg = 0.5\n",
        "[corpus]\nrecords = \"missing.csv\"\n",
    ] {
        let cfg = write_config(tmp.path(), text);
        let out = reqroi(&["eas1", "--config", &cfg, "--out", "o"], tmp.path());
        assert_eq!(out.status.code(), Some(2), "{text}: {}", stderr(&out));
    }
    let out = reqroi(&["eas1"], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(2),
        "missing --out: {}",
        stderr(&out)
    );
}

#[test]
fn malformed_data_exits_with_data_code() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("records.csv"),
        "id,title\n1,\"unterminated\n",
    )
    .unwrap();
    let cfg = write_config(tmp.path(), "[corpus]\nrecords = \"records.csv\"\n");
    let out = reqroi(&["prepare", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));

    fs::write(tmp.path().join("bad.csv"), "x,roi\n0.1,0.5\n0.1,0.7\n").unwrap();
    let out = reqroi(&["report", "bad.csv", "--out", "r"], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("row 3"));
}

#[test]
fn tiny_corpus_reports_minimum_size() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[corpus.synth]\nn_records = 40\n");
    let out = reqroi(&["eas1", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("at least"));
}

#[test]
fn synth_prepare_and_fetch_write_their_files() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = reqroi(&["synth", "--config", &cfg, "--out", "s"], tmp.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let records = fs::read_to_string(tmp.path().join("s/records.csv")).unwrap();
    assert_eq!(records.lines().count(), 901);

    let out = reqroi(&["prepare", "--config", &cfg, "--out", "p"], tmp.path());
    assert!(out.status.success(), "{}", stderr(&out));
    for f in [
        "pairs.csv",
        "train.csv",
        "test.csv",
        "summary.json",
        "config_snapshot.toml",
    ] {
        assert!(tmp.path().join("p").join(f).exists(), "{f}");
    }

    let fixture =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/bugzilla_page.json");
    let out = reqroi(
        &[
            "fetch",
            "--fixture",
            fixture.to_str().unwrap(),
            "--out",
            "f",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let fetched = fs::read_to_string(tmp.path().join("f/records.csv")).unwrap();
    assert_eq!(fetched.lines().count(), 5);
}

#[test]
fn eas1_grid_gives_one_row_per_fraction() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = reqroi(&["eas1", "--config", &cfg, "--out", "e1"], tmp.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let sweep = fs::read_to_string(tmp.path().join("e1/sweep.csv")).unwrap();
    let rows: Vec<&str> = sweep.lines().skip(1).collect();
    assert_eq!(rows.iter().filter(|r| r.starts_with("NB,")).count(), 2);
    assert_eq!(rows.iter().filter(|r| r.starts_with("RF,")).count(), 2);
    for f in [
        "roi_eas1_nb.csv",
        "roi_eas1_rf.csv",
        "summary.json",
        "config_snapshot.toml",
    ] {
        assert!(tmp.path().join("e1").join(f).exists(), "{f}");
    }
    let snapshot = fs::read_to_string(tmp.path().join("e1/config_snapshot.toml")).unwrap();
    let reread = RunConfig::parse(&snapshot).unwrap();
    let mut want = RunConfig::load(Path::new(&cfg)).unwrap();
    want.out = None;
    assert_eq!(reread, want);
}

#[test]
fn zero_iterations_write_seed_row_only() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        &SMALL.replace("iterations = 2", "iterations = 0"),
    );
    let out = reqroi(
        &[
            "eas2",
            "--config",
            &cfg,
            "--out",
            "e2",
            "--strategy",
            "entropy",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    for name in ["entropy", "random"] {
        let text =
            fs::read_to_string(tmp.path().join(format!("e2/iterations_{name}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 2, "{name}");
    }
    assert!(!tmp.path().join("e2/roi_eas2_entropy.csv").exists());
}

#[test]
fn report_merges_curves_idempotently() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("a.csv"),
        "x,f1,cost,benefit,roi\n1,0.5,10,5,-0.5\n2,0.6,10,12,0.2\n",
    )
    .unwrap();
    fs::write(tmp.path().join("b.csv"), "x,roi\n0.1,1\n0.2,3\n0.3,2\n").unwrap();
    let inputs = [tmp.path().join("a.csv"), tmp.path().join("b.csv")];
    let (first, summaries) = cmd_report(&inputs, &tmp.path().join("r1")).unwrap();
    assert_eq!(summaries.len(), 2);
    assert!((summaries[0].break_even.unwrap() - (1.0 + 0.5 / 0.7)).abs() < 1e-9);
    assert_eq!(summaries[1].peak_x, 0.2);
    assert_eq!(summaries[1].break_even, Some(0.1));
    let (second, _) = cmd_report(&inputs, &tmp.path().join("r2")).unwrap();
    for (a, b) in first.files.iter().zip(&second.files) {
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }
    let merged = fs::read_to_string(&first.files[0]).unwrap();
    assert_eq!(merged.lines().count(), 6);
    // The merged table reads back as a report input.
    let (_, again) = cmd_report(&[first.files[0].clone()], &tmp.path().join("r3")).unwrap();
    assert_eq!(again, summaries);
    assert!(cmd_report(
        &[inputs[0].clone(), inputs[0].clone()],
        &tmp.path().join("r4")
    )
    .is_err());
}

#[test]
fn library_runs_match_config() {
    let mut config = RunConfig::parse(SMALL).unwrap();
    config.seed = 3;
    let e1 = run_eas1(&config).unwrap();
    assert_eq!(e1.rows_for(ModelKind::NaiveBayes).count(), 2);
    let sizes: Vec<usize> = e1
        .rows_for(ModelKind::RandomForest)
        .map(|r| r.n_train)
        .collect();
    assert!(sizes[0] < sizes[1]);

    let e2 = run_eas2(&config).unwrap();
    assert_eq!(e2.summary.strategies.len(), 2);
    for s in &e2.summary.strategies {
        assert_eq!(s.final_n_train, 30 + 2 * 5);
        assert_eq!(s.oracle_queries, s.final_n_train);
    }
}

#[test]
fn shipped_example_config_is_valid() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/example.toml");
    let config = RunConfig::load(&path).unwrap();
    config.validate().unwrap();
    assert_eq!(config.corpus.synth.n_records, 12_000);
    let mut defaults = RunConfig::default();
    defaults.corpus.synth.n_records = 12_000;
    assert_eq!(config.roi_params().unwrap(), defaults.roi_params().unwrap());
    defaults.roi = config.roi.clone();
    assert_eq!(config, defaults);
}
