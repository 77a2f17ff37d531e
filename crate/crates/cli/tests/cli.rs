use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_radcount");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// Runs every subcommand once inside `dir`.
fn pipeline(dir: &Path) {
    ok(dir, &["--seed", "3", "synth", "--preset", "A", "--per-class", "5", "--out", "a"]);
    ok(dir, &["--seed", "3", "synth", "--preset", "B_complex", "--per-class", "2", "--out", "b"]);
    ok(dir, &["preprocess", "--manifest", "a/manifest.jsonl", "--out", "pre", "--global-percentiles"]);
    ok(dir, &["preprocess", "--in", "a/A_empty-c1-0000.radc", "--out", "one.radc", "--stage", "normalized"]);
    ok(dir, &["extract-features", "--manifest", "a/manifest.jsonl", "--out", "features.csv"]);
    for family in ["knn", "rf", "svm"] {
        let model = format!("{family}.json");
        let preds = format!("{family}_preds.csv");
        ok(dir, &["--seed", "3", "train", "--family", family, "--features", "features.csv", "--out", &model]);
        ok(dir, &["predict", "--model", &model, "--features", "features.csv", "--split", "test", "--out", &preds]);
        ok(dir, &["evaluate", "--pred", &preds, "--out", &format!("{family}_report.json")]);
    }
    ok(dir, &["count", "--manifest", "a/manifest.jsonl", "--out", "rule_preds.csv", "--explain"]);
    ok(dir, &["count", "--in", "a/A_desks-c2-0002.radc", "--explain", "--out", "explain.json"]);
    ok(dir, &["evaluate", "--pred", "rule_preds.csv", "--out", "rule_report.json"]);
    fs::write(
        dir.join("small_grid.json"),
        r#"{"grid": {"window_sizes": [10, 30], "tau_points": 5}}"#,
    )
    .unwrap();
    ok(dir, &["--config", "small_grid.json", "tune", "--manifest", "a/manifest.jsonl", "--out", "tune.json", "--csv", "tune.csv"]);
    fs::write(
        dir.join("plan.json"),
        r#"{"train": {"name": "envA_train", "path": "a/manifest.jsonl", "split": "train"},
            "val": {"name": "envA_val", "path": "a/manifest.jsonl", "split": "val"},
            "tests": [{"name": "envA_test", "path": "a/manifest.jsonl", "split": "test"},
                      {"name": "envB_test", "path": "b/manifest.jsonl", "split": "test"}],
            "models": ["rulecc", "knn", "rf", "svm"],
            "output_dir": "exp", "seed": 3}"#,
    )
    .unwrap();
    ok(dir, &["experiment", "--plan", "plan.json"]);
}

#[test]
fn every_command_is_bitwise_reproducible() {
    let one = tempfile::tempdir().unwrap();
    let two = tempfile::tempdir().unwrap();
    pipeline(one.path());
    pipeline(two.path());
    let (a, b) = (tree(one.path()), tree(two.path()));
    for expected in [
        "a/manifest.jsonl",
        "a/scenes.json",
        "pre/manifest.jsonl",
        "one.radc",
        "features.csv",
        "rf.json",
        "svm_preds.csv",
        "knn_report.json",
        "rule_preds.csv",
        "rule_preds.explain.json",
        "explain.json",
        "tune.json",
        "tune.csv",
        "exp/reports.json",
        "exp/drops.csv",
        "exp/predictions.csv",
        "exp/summary.txt",
    ] {
        assert!(a.contains_key(Path::new(expected)), "missing {expected}");
    }
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    for (path, bytes) in &a {
        assert!(bytes == &b[path], "{} differs between runs", path.display());
    }
    let tune_rows = String::from_utf8(a[Path::new("tune.csv")].clone()).unwrap();
    assert_eq!(tune_rows.lines().count(), 1 + 2 * 5);
}

#[test]
fn seed_changes_synthetic_data() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--seed", "1", "synth", "--preset", "A_empty", "--per-class", "1", "--out", "x"]);
    ok(d.path(), &["--seed", "2", "synth", "--preset", "A_empty", "--per-class", "1", "--out", "y"]);
    let x = fs::read(d.path().join("x/A_empty-c2-0000.radc")).unwrap();
    let y = fs::read(d.path().join("y/A_empty-c2-0000.radc")).unwrap();
    assert_ne!(x, y);
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["verify-fixtures"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("24 of 24 checks pass"));

    let missing = run(d.path(), &["count", "--manifest", "nowhere.jsonl", "--out", "p.csv"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nowhere.jsonl"));

    let bad_cfg = d.path().join("bad.json");
    fs::write(&bad_cfg, r#"{"weights": {"w_acc": 0.9, "w_f1macro": 0.2, "w_f1min": 0.3, "w_recmin": 0.15, "w_nonzero": 0.1}}"#).unwrap();
    let out = run(d.path(), &["--config", "bad.json", "verify-fixtures"]);
    assert_eq!(out.status.code(), Some(2));

    // a single-count change to one matrix must be caught
    let shipped = include_str!("../../core/fixtures/published_confusion_matrices.json");
    let tampered = shipped.replacen("\"counts\": [[", "\"counts\": [[1", 1);
    assert_ne!(shipped, tampered);
    fs::write(d.path().join("t.json"), tampered).unwrap();
    let out = run(d.path(), &["verify-fixtures", "--file", "t.json"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn experiment_refuses_test_rows_for_fitting() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["synth", "--preset", "B_complex", "--per-class", "2", "--out", "b"]);
    fs::write(
        d.path().join("plan.json"),
        r#"{"train": {"name": "t", "path": "b/manifest.jsonl"},
            "val": {"name": "v", "path": "b/manifest.jsonl"},
            "tests": [{"name": "x", "path": "b/manifest.jsonl"}],
            "models": ["rulecc"], "output_dir": "o"}"#,
    )
    .unwrap();
    let out = run(d.path(), &["experiment", "--plan", "plan.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("more than one manifest") || err.contains("marked test"), "{err}");
}
