//! Error-path checks against the installed binary: each bad input must
//! exit with the documented code and one parsable line on stderr.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fact(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fact"))
        .current_dir(dir)
        .env_remove("FACT_SEED")
        .args(args)
        .output()
        .expect("spawn fact")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn unknown_category_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = fact(
        dir.path(),
        &["generate", "--category", "polynomia", "--count", "1", "--seed", "1", "--out", "x.jsonl"],
    );
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    let err = stderr(&out);
    assert!(err.starts_with("error: config:"), "stderr: {err}");
    assert!(err.contains("unknown category `polynomia`"), "stderr: {err}");
}

#[test]
fn four_part_split_without_organic_records_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let ok = fact(
        dir.path(),
        &["generate", "--category", "polynomial", "--count", "24", "--seed", "1", "--out", "corpus.jsonl"],
    );
    assert!(ok.status.success(), "generate failed: {}", stderr(&ok));

    let out = fact(
        dir.path(),
        &["split", "--input", "corpus.jsonl", "--ratios", "9:1:1:1", "--seed", "1", "--out-dir", "splits"],
    );
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("no organic records available"), "stderr: {}", stderr(&out));
}

#[test]
fn eval_names_the_first_instance_missing_a_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let steps: &[&[&str]] = &[
        &["generate", "--category", "polynomial", "--count", "40", "--seed", "7", "--out", "corpus.jsonl"],
        &["tasks", "--task", "continuation", "--input", "corpus.jsonl", "--seed", "7", "--out", "tasks.jsonl"],
        &["baseline", "--model", "knn", "--train", "tasks.jsonl", "--test", "tasks.jsonl", "--out", "preds.jsonl"],
    ];
    for step in steps {
        let out = fact(dir.path(), step);
        assert!(out.status.success(), "{} failed: {}", step[0], stderr(&out));
    }

    let tasks = fs::read_to_string(dir.path().join("tasks.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(tasks.lines().next().unwrap()).unwrap();
    let first_id = first["id"].as_str().unwrap().to_owned();

    let preds = fs::read_to_string(dir.path().join("preds.jsonl")).unwrap();
    let total = preds.lines().count();
    let kept: Vec<&str> = preds
        .lines()
        .filter(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["id"] != first_id.as_str())
        .collect();
    assert_eq!(kept.len() + 1, total, "expected exactly one prediction for {first_id}");
    fs::write(dir.path().join("preds.jsonl"), kept.join("\n") + "\n").unwrap();

    let out = fact(
        dir.path(),
        &["eval", "--tasks", "tasks.jsonl", "--preds", "preds.jsonl", "--out", "report.json"],
    );
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("no prediction found for instance"), "stderr: {err}");
    assert!(err.contains(&first_id), "stderr: {err}");
}
