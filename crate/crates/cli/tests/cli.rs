//! End-to-end binary tests: subcommand wiring, artifacts, and exit codes.

use std::path::Path;
use std::process::Command;

fn starscout() -> Command {
    Command::new(env!("CARGO_BIN_EXE_starscout"))
}

fn shrink_config(dir: &Path) {
    // Trim iteration counts so the binary tests stay quick.
    let path = dir.join("config.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut config: serde_json::Value = serde_json::from_str(&text).unwrap();
    config["lda"]["iterations"] = 20.into();
    config["ml"]["rf"]["trees"] = 10.into();
    config["ml"]["lr"]["epochs"] = 150.into();
    config["ml"]["svm"]["epochs"] = 150.into();
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
}

fn synth_into(dir: &Path, authors: u32, seed: u32) {
    let status = starscout()
        .args([
            "synth",
            "--out",
            dir.to_str().unwrap(),
            "--authors",
            &authors.to_string(),
            "--rising-fraction",
            "0.08",
            "--seed",
            &seed.to_string(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    shrink_config(dir);
}

#[test]
fn run_produces_all_artifacts_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    synth_into(dir.path(), 600, 3);
    let output = starscout()
        .args([
            "run",
            "--config",
            dir.path().join("config.json").to_str().unwrap(),
            "--threads",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    for file in [
        "feature_matrix.csv",
        "label_report.csv",
        "correlation_matrix.csv",
        "group_comparison.csv",
        "evaluation_report.json",
        "manifest.json",
    ] {
        assert!(dir.path().join("out").join(file).exists(), "{file} missing");
    }
}

#[test]
fn missing_config_exits_two() {
    let output = starscout()
        .args(["run", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn invalid_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("config.json"), r#"{"bogus": true}"#).unwrap();
    let output = starscout()
        .args([
            "run",
            "--config",
            dir.path().join("config.json").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn corrupt_corpus_fails_stage_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    synth_into(dir.path(), 120, 5);
    // Duplicate the first publication line: duplicate pub_id is fatal.
    let corpus = dir.path().join("corpus.jsonl");
    let text = std::fs::read_to_string(&corpus).unwrap();
    let first = text.lines().next().unwrap().to_string();
    std::fs::write(&corpus, format!("{first}\n{text}")).unwrap();
    let output = starscout()
        .args([
            "ingest",
            "--config",
            dir.path().join("config.json").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "{output:?}");
}

#[test]
fn stage_subcommands_emit_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    synth_into(dir.path(), 150, 7);
    let config = dir.path().join("config.json");
    let config = config.to_str().unwrap();

    for (args, expected) in [
        (vec!["tier"], vec!["venue_tiers.csv"]),
        (vec!["text"], vec!["dtm.csv", "vocabulary.txt"]),
        (vec!["label"], vec!["label_report.csv"]),
        (vec!["report"], vec!["distributions.csv"]),
        (vec!["network"], vec!["network_metrics.csv"]),
        (vec!["features"], vec!["feature_matrix.csv"]),
    ] {
        let mut full = args.clone();
        full.extend(["--config", config]);
        let output = starscout().args(&full).output().unwrap();
        assert_eq!(output.status.code(), Some(0), "{args:?}: {output:?}");
        for file in expected {
            assert!(
                dir.path().join("out").join(file).exists(),
                "{args:?} did not write {file}"
            );
        }
    }
}

#[test]
fn seed_override_changes_outputs_and_rerun_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    synth_into(dir.path(), 600, 9);
    let config = dir.path().join("config.json");
    let config = config.to_str().unwrap();
    let run = |out: &str, seed: &str| {
        let output = starscout()
            .args([
                "run", "--config", config, "--out", out, "--seed", seed,
            ])
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0));
        std::fs::read(Path::new(out).join("evaluation_report.json")).unwrap()
    };
    let a = run(dir.path().join("o1").to_str().unwrap(), "5");
    let b = run(dir.path().join("o2").to_str().unwrap(), "5");
    let c = run(dir.path().join("o3").to_str().unwrap(), "6");
    assert_eq!(a, b);
    assert_ne!(a, c);
}
