use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use onhold::dataset::{render_dataset, DatasetRow};
use onhold::learner::Label;
use onhold::synthetic::synthetic_corpus;

fn onhold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onhold"))
        .args(args)
        .env_remove("ITS_JIRA_TOKEN")
        .output()
        .expect("run onhold")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/its")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synthetic_tsv(dir: &Path, total: usize, on_hold: usize, seed: u64) -> PathBuf {
    let rows: Vec<DatasetRow> = synthetic_corpus(total, on_hold, seed)
        .into_iter()
        .enumerate()
        .map(|(i, (text, label))| {
            let mut row = DatasetRow::new(text, format!("src/F{i}.java"), 1);
            row.label = Some(label);
            row
        })
        .collect();
    let path = dir.join("labeled.tsv");
    std::fs::write(&path, render_dataset(&rows)).unwrap();
    path
}

fn on_hold_row(comment: &str, key: &str, line: usize) -> DatasetRow {
    let mut row = DatasetRow::new(comment, "src/Fs.java", line);
    row.issue_keys = vec![key.into()];
    row.label = Some(Label::OnHold);
    row
}

#[test]
fn unknown_flag_is_a_user_error() {
    let out = onhold(&["evaluate", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Usage"));
    assert_eq!(onhold(&["--help"]).status.code(), Some(0));
    assert_eq!(onhold(&[]).status.code(), Some(1));
}

#[test]
fn dump_patterns() {
    let out = onhold(&["detect", "--dump-patterns", "--projects", "bugzilla:ant,jira:HADOOP"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains(r"(?<![A-Za-z])(?:bug|ant|bugzilla|bz)[ -](?:#)?\d+(?:\.[0-9xX*]+)*"));
    assert!(text.contains("HADOOP"));
    assert!(!text.contains("projectname"));
}

#[test]
fn detect_lists_references() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.tsv");
    let rows = [
        on_hold_row("remove once HADOOP-6223 and bug 12 are done", "HADOOP-6223", 3),
        on_hold_row("nothing here", "", 9),
    ];
    std::fs::write(&data, render_dataset(&rows)).unwrap();
    let out = onhold(&["detect", "--projects", "jira:HADOOP", "--dataset", s(&data)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1], "src/Fs.java\t3\tjira\tHADOOP-6223\tHADOOP-6223\t12\t23");
    assert_eq!(lines[2], "src/Fs.java\t3\tjira\tHADOOP-12\tbug 12\t28\t34");
}

#[test]
fn mine_a_repository() {
    let dir = tempfile::tempdir().unwrap();
    let git = |args: &[&str]| {
        let ok = Command::new("git")
            .args(args)
            .current_dir(dir.path())
            .env("GIT_AUTHOR_DATE", "2021-05-01T00:00:00Z")
            .env("GIT_COMMITTER_DATE", "2021-05-01T00:00:00Z")
            .env("HOME", dir.path())
            .env("GIT_CONFIG_NOSYSTEM", "1")
            .status()
            .unwrap()
            .success();
        assert!(ok, "git {args:?}");
    };
    git(&["init", "-q", "-b", "trunk"]);
    git(&["config", "user.name", "T"]);
    git(&["config", "user.email", "t@example.invalid"]);
    std::fs::write(dir.path().join("A.java"), "class A {\n  // TODO remove after HADOOP-6223\n}\n").unwrap();
    git(&["add", "-A"]);
    git(&["commit", "-q", "-m", "a"]);

    let config = dir.path().join("project.json");
    let repo = dir.path().to_str().unwrap().replace('\\', "/");
    std::fs::write(&config, format!(r#"{{"repo": "{repo}", "branch": "trunk", "tracker": "jira", "project_key": "HADOOP"}}"#)).unwrap();
    let out = onhold(&["mine", "--config", s(&config)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2, "{text}");
    assert!(text.contains("TODO remove after HADOOP-6223\tA.java\t2\tHADOOP-6223"));
    assert!(text.contains("2021-05-01T00:00:00Z"));

    let missing = onhold(&["mine", "--config", s(&config), "--branch", "nope"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn train_classify_check_report() {
    let dir = tempfile::tempdir().unwrap();
    let labeled = synthetic_tsv(dir.path(), 300, 50, 3);
    let model = dir.path().join("model.json");
    let out = onhold(&["train", "--projects", "jira:HADOOP", "--dataset", s(&labeled), "--model", s(&model), "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("50 OnHold / 250 CrossReference (300 comments)"));

    let input = dir.path().join("remaining.tsv");
    let mut rows = vec![
        on_hold_row("return type will change to AFS once HADOOP-6223 is completed", "HADOOP-6223", 10),
        on_hold_row("remove after HADOOP-11938 is fixed", "HADOOP-11938", 20),
        on_hold_row("see HADOOP-1230 for the background of this class", "HADOOP-1230", 30),
    ];
    for r in &mut rows {
        r.label = None;
    }
    std::fs::write(&input, render_dataset(&rows)).unwrap();
    let predictions = dir.path().join("pred.tsv");
    let out = onhold(&["classify", "--model", s(&model), "--dataset", s(&input), "--out", s(&predictions)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let predicted = std::fs::read_to_string(&predictions).unwrap();
    let labels: Vec<&str> = predicted.lines().skip(1).map(|l| l.split('\t').nth(4).unwrap()).collect();
    assert_eq!(labels, ["OnHold", "OnHold", "CrossReference"], "{predicted}");

    let recs = dir.path().join("recs.json");
    let annotated = dir.path().join("annotated.tsv");
    let out = onhold(&[
        "check",
        "--projects",
        "jira:HADOOP",
        "--predictions",
        s(&predictions),
        "--fixtures",
        s(&fixtures()),
        "--out",
        s(&recs),
        "--annotate",
        s(&annotated),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&recs).unwrap()).unwrap();
    let keys: Vec<(&str, bool)> = json
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["issue"]["key"].as_str().unwrap(), r["ready"].as_bool().unwrap()))
        .collect();
    assert_eq!(keys, [("HADOOP-6223", true), ("HADOOP-11938", false)]);
    assert!(std::fs::read_to_string(&annotated).unwrap().contains("Resolved\tFixed\t2009-10-15T21:30:57Z"));

    let md = onhold(&["report", "--recommendations", s(&recs)]);
    assert_eq!(md.status.code(), Some(0));
    let md = stdout(&md);
    assert!(md.contains("HADOOP-6223") && md.contains("ready to be removed") && md.contains("Remove the comment"));

    let js = onhold(&["report", "--recommendations", s(&recs), "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&js)).unwrap();
    assert_eq!(doc["schema_version"], "1.0");
    assert_eq!(doc["ready"], 1);
}

#[test]
fn corrupted_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let labeled = synthetic_tsv(dir.path(), 120, 30, 1);
    let model = dir.path().join("model.json");
    let out = onhold(&["train", "--projects", "jira:HADOOP", "--dataset", s(&labeled), "--model", s(&model), "--variant", "ngram-nb"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&model).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["classifier"]["vocabulary_hash"] = "0".repeat(64).into();
    std::fs::write(&model, doc.to_string()).unwrap();
    let out = onhold(&["classify", "--model", s(&model), "--dataset", s(&labeled)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("hash"));
}

#[test]
fn live_check_without_endpoint_is_an_environment_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("p.tsv");
    std::fs::write(&input, render_dataset(&[on_hold_row("once HADOOP-6223 lands", "HADOOP-6223", 1)])).unwrap();
    let out = onhold(&["check", "--projects", "jira:HADOOP", "--predictions", s(&input)]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn evaluate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let labeled = synthetic_tsv(dir.path(), 200, 40, 9);
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = onhold(&[
            "evaluate",
            "--projects",
            "jira:HADOOP",
            "--dataset",
            s(&labeled),
            "--variants",
            "ngram-auto,bow-auto",
            "--k",
            "3",
            "--seed",
            "7",
            "--out-dir",
            s(&out_dir),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert!(stderr(&out).contains("40 OnHold / 160 CrossReference"));
        ["results.tsv", "summary.tsv", "comparisons.tsv"].map(|f| std::fs::read(out_dir.join(f)).unwrap())
    };
    let first = run("a");
    assert_eq!(first, run("b"));
    let summary = String::from_utf8(first[1].clone()).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.starts_with("variant\tprecision\trecall\tf1\tauc\n"));

    let bad = onhold(&["evaluate", "--projects", "jira:HADOOP", "--dataset", s(&labeled), "--variants", "trigram-auto"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn lifecycle_summary() {
    let dir = tempfile::tempdir().unwrap();
    let day = |d: &str| Some(onhold::dataset::parse_date(d).unwrap());
    let mut a = on_hold_row("once HADOOP-6223 is done", "HADOOP-6223", 1);
    a.introduced_date = day("2020-01-01");
    a.removed_commit = Some("c2".into());
    a.removed_date = day("2020-01-11");
    a.issue_status = Some("Resolved".into());
    a.issue_resolution = Some("Fixed".into());
    a.issue_resolved_date = day("2020-01-11");
    let mut b = on_hold_row("see HADOOP-1 for context", "HADOOP-1", 2);
    b.label = Some(Label::CrossReference);
    b.introduced_date = day("2020-01-01");
    b.removed_commit = Some("c3".into());
    b.removed_date = day("2020-03-01");
    let path = dir.path().join("l.tsv");
    std::fs::write(&path, render_dataset(&[a, b])).unwrap();
    let out = onhold(&["lifecycle", "--dataset", s(&path)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("lifespan_days_on_hold\tmedian\t10.000000"), "{text}");
    assert!(text.contains("lifespan_days_cross_reference\tmedian\t60.000000"));
    assert!(text.contains("removed_on_hold\tremoved_after_resolution\t1"));
    assert!(text.contains("days_from_resolution_to_removal\tsame_day_fraction\t1.000000"));
}
