use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_domainbal"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    run(dir, args).status.code().unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn write(dir: &Path, name: &str, lines: &[(&str, &str)]) -> PathBuf {
    let text: String = lines
        .iter()
        .map(|(c, r)| format!("{}\n", serde_json::json!({"context": c, "response": r})))
        .collect();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn toy(dir: &Path) {
    write(dir, "a.jsonl", &[("apple apple", "pear")]);
    write(dir, "b.jsonl", &[("pear", "kiwi")]);
    ok(dir, &["ingest", "--corpus", "a=a.jsonl", "--corpus", "b=b.jsonl", "--out", "d"]);
}

fn synthetic(dir: &Path, out: &str, seed: &str) {
    ok(dir, &["ingest", "--synthetic", "3x24", "--seed", seed, "--out", out]);
}

const SMALL: [&str; 6] = ["--epochs", "1", "--dim", "6", "--seed", "1"];

#[test]
fn help_and_usage_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(dir.path(), &["--help"]), 0);
    assert_eq!(code(dir.path(), &["frobnicate"]), 2);
    assert_eq!(code(dir.path(), &["df"]), 2);
}

#[test]
fn missing_input_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(dir.path(), &["ingest", "--corpus", "a=nope.jsonl", "--out", "d"]), 1);
    assert_eq!(code(dir.path(), &["df", "--registry", "nope.json", "--out", "x"]), 1);
}

#[test]
fn spec_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "a.jsonl", &[("x y", "z")]);
    assert_eq!(code(d, &["ingest", "--corpus", "a=a.jsonl", "--corpus", "a=a.jsonl", "--out", "o"]), 2);

    ok(d, &["ingest", "--corpus", "a=a.jsonl", "--out", "single"]);
    assert_eq!(code(d, &["mix", "--registry", "single/registry.json", "--out", "m"]), 2);

    toy(d);
    assert_eq!(code(d, &["df", "--registry", "d/registry.json", "--alpha", "1", "--out", "x"]), 2);
    assert!(!d.join("x").exists());
}

#[test]
fn training_and_generation_policies() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synthetic(d, "s", "3");
    let reg = "s/registry.json";
    let mut args = vec!["train", "--registry", reg, "--method", "weighted", "--out", "w.ckpt"];
    args.extend(SMALL);
    assert_eq!(code(d, &args), 2);
    assert!(!d.join("w.ckpt").exists());

    let mut args = vec!["train", "--registry", reg, "--method", "labeled", "--out", "l.ckpt"];
    args.extend(SMALL);
    ok(d, &args);
    let gen = ["generate", "--registry", reg, "--checkpoint", "l.ckpt", "--out", "r.jsonl"];
    assert_eq!(code(d, &gen), 2);
    let mut with_labels = gen.to_vec();
    with_labels.push("--labels");
    ok(d, &with_labels);

    let mut args = vec!["train", "--registry", reg, "--method", "interleaved", "--out", "i.ckpt"];
    args.extend(SMALL);
    ok(d, &args);
    let gen = ["generate", "--registry", reg, "--checkpoint", "i.ckpt", "--labels", "--out", "x.jsonl"];
    assert_eq!(code(d, &gen), 2);
}

#[test]
fn vocabulary_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synthetic(d, "one", "1");
    synthetic(d, "two", "2");
    ok(d, &["df", "--registry", "one/registry.json", "--out", "one.tsv"]);
    ok(d, &["df", "--registry", "two/registry.json", "--out", "two.tsv"]);
    let mut args = vec!["train", "--registry", "one/registry.json", "--method", "interleaved", "--out", "c"];
    args.extend(SMALL);
    ok(d, &args);

    let mut args = vec![
        "train", "--registry", "two/registry.json", "--method", "weighted", "--df-table", "one.tsv", "--out", "w",
    ];
    args.extend(SMALL);
    assert_eq!(code(d, &args), 2);
    let gen = ["generate", "--registry", "two/registry.json", "--checkpoint", "c", "--out", "r"];
    assert_eq!(code(d, &gen), 2);
}

#[test]
fn ingest_and_train_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synthetic(d, "a", "9");
    synthetic(d, "b", "9");
    for entry in std::fs::read_dir(d.join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        let a = std::fs::read(d.join("a").join(&name)).unwrap();
        let b = std::fs::read(d.join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?}");
    }
    for out in ["x.ckpt", "y.ckpt"] {
        let mut args = vec!["train", "--registry", "a/registry.json", "--method", "multitask_labeled", "--out", out];
        args.extend(SMALL);
        ok(d, &args);
    }
    assert_eq!(std::fs::read(d.join("x.ckpt")).unwrap(), std::fs::read(d.join("y.ckpt")).unwrap());
}

#[test]
fn df_table_on_toy_corpora() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    toy(d);
    ok(d, &["df", "--registry", "d/registry.json", "--out", "df.tsv", "--tfidf-out", "tfidf.tsv"]);
    let text = std::fs::read_to_string(d.join("df.tsv")).unwrap();
    assert!(text.starts_with("# domainbal df v1\n"));
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split('\t').collect())
        .collect();
    assert_eq!(rows.len(), 6);
    // apple: freq 2/3 in a against a minimum of 1/3, and absent from b.
    assert_eq!(rows[0][..2], ["apple", "a"]);
    assert!((rows[0][2].parse::<f64>().unwrap() - 1.0 / 3.0).abs() < 1e-11);
    assert_eq!(rows[0][4].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[0][5].parse::<f64>().unwrap(), 100.0);
    assert!(rows[1..].iter().all(|r| r[4].parse::<f64>().unwrap() == 0.0));
    assert!(d.join("tfidf.tsv").exists());
}

#[test]
fn mix_file_covers_every_pair_once() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synthetic(d, "s", "4");
    ok(d, &["mix", "--registry", "s/registry.json", "--seed", "7", "--out", "m.txt"]);
    let text = std::fs::read_to_string(d.join("m.txt")).unwrap();
    let mut entries: Vec<(usize, usize)> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let (c, i) = l.split_once('\t').unwrap();
            (c.parse().unwrap(), i.parse().unwrap())
        })
        .collect();
    assert_eq!(entries.len(), 72);
    for round in entries.chunks(3) {
        let mut cs: Vec<usize> = round.iter().map(|e| e.0).collect();
        cs.sort();
        assert_eq!(cs, [0, 1, 2]);
    }
    entries.sort();
    entries.dedup();
    assert_eq!(entries.len(), 72);

    ok(d, &["mix", "--registry", "s/registry.json", "--seed", "7", "--out", "m2.txt"]);
    assert_eq!(text, std::fs::read_to_string(d.join("m2.txt")).unwrap());
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    toy(d);
    std::fs::write(d.join("run.json"), "alpha=10\nout=cfg.tsv\n").unwrap();
    ok(d, &["df", "--config", "run.json", "--registry", "d/registry.json"]);
    let text = std::fs::read_to_string(d.join("cfg.tsv")).unwrap();
    assert!(text.contains("# alpha=10\n"));
}
