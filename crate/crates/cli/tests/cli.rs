use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/fixtures")
}

fn nmt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmt")).args(args).env("RUST_BACKTRACE", "0").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = nmt(args);
    assert!(out.status.success(), "nmt {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn parse_prints_logical_forms() {
    let out = ok(&["parse", "--text", "X is \"funeral\". \"on\" is directly before the answer."]);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["variables"]["X"], "funeral");
    assert_eq!(v["sentences"][0]["parse"], "@Is(\"on\", @Direct(@Left(Answer)))");
}

#[test]
fn fixture_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures().join("instances.jsonl");
    let teachers = dir.path().join("teachers.jsonl");
    ok(&["teach", "--explanations", s(&fixtures().join("explanations.jsonl")), "--corpus", s(&corpus), "--out", s(&teachers)]);
    assert_eq!(fs::read_to_string(&teachers).unwrap().lines().count(), 4);

    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        ok(&["label", "--corpus", s(&corpus), "--teachers", s(&teachers), "--out", s(out)]);
    }
    for f in ["strict.jsonl", "soft.jsonl", "unlabeled.jsonl", "stats.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let strict = fs::read_to_string(a.join("strict.jsonl")).unwrap();
    assert!(strict.contains("\"answer_text\":\"24 September 1973\""));
    assert!(fs::read_to_string(a.join("soft.jsonl")).unwrap().contains("\"z\":0.9375"));

    let strict_only = dir.path().join("strict_only");
    ok(&["label", "--corpus", s(&corpus), "--teachers", s(&teachers), "--out", s(&strict_only), "--strict-only"]);
    assert!(fs::read_to_string(strict_only.join("soft.jsonl")).unwrap().is_empty());
    assert_eq!(fs::read(strict_only.join("strict.jsonl")).unwrap(), strict.as_bytes());

    let model = dir.path().join("model.json");
    ok(&["train", "--splits", s(&a), "--corpus", s(&corpus), "--mode", "da+pl", "--out", s(&model)]);
    let preds = dir.path().join("preds.json");
    ok(&["predict", "--model", s(&model), "--corpus", s(&corpus), "--out", s(&preds)]);
    let m: serde_json::Value = serde_json::from_str(&ok(&["eval", "--pred", s(&preds), "--gold", s(&corpus)])).unwrap();
    let f1 = m["f1"].as_f64().unwrap();
    assert!((0.0..=100.0).contains(&f1));
}

#[test]
fn train_reads_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures().join("instances.jsonl");
    let teachers = dir.path().join("t.jsonl");
    ok(&["teach", "--explanations", s(&fixtures().join("explanations.jsonl")), "--corpus", s(&corpus), "--out", s(&teachers)]);
    let splits = dir.path().join("splits");
    ok(&["label", "--corpus", s(&corpus), "--teachers", s(&teachers), "--out", s(&splits)]);
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"epochs": 2, "seed": 3}"#).unwrap();
    ok(&["train", "--splits", s(&splits), "--corpus", s(&corpus), "--mode", "sa", "--config", s(&cfg), "--out", s(&dir.path().join("m.json"))]);

    fs::write(&cfg, r#"{"epochz": 2}"#).unwrap();
    let out = nmt(&["train", "--splits", s(&splits), "--corpus", s(&corpus), "--config", s(&cfg), "--out", s(&dir.path().join("m2.json"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("epochz"));
}

#[test]
fn synth_writes_corpus_and_explanations() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["synth", "--seed", "2", "--size", "50", "--heldout", "10", "--out", s(dir.path())]);
    assert_eq!(fs::read_to_string(dir.path().join("corpus.jsonl")).unwrap().lines().count(), 50);
    assert_eq!(fs::read_to_string(dir.path().join("heldout.jsonl")).unwrap().lines().count(), 10);
    assert_eq!(fs::read_to_string(dir.path().join("explanations.jsonl")).unwrap().lines().count(), 5);
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = nmt(&["label", "--corpus", "missing.jsonl", "--teachers", "t.jsonl", "--out", s(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.jsonl"));

    let corpus = fixtures().join("instances.jsonl");
    let out = nmt(&["label", "--corpus", s(&corpus), "--teachers", "t.jsonl", "--out", s(dir.path()), "--threshold", "1.5"]);
    assert!(!out.status.success());

    let out = nmt(&["train", "--splits", "x", "--corpus", "y", "--mode", "bogus", "--out", "z"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}
