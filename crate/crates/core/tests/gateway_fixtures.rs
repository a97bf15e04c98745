mod common;

use onhold::its::{is_ready_to_remove, recommend, Gateway, ItsError, OnHoldComment};
use onhold::linker::{PatternSet, TrackerKind};
use onhold::miner::mine_repository;
use onhold::report::{render_report, ReportFormat};

fn its_dir() -> std::path::PathBuf {
    common::fixtures_dir().join("its")
}

#[test]
fn jira_fixtures_parse() {
    let gw = Gateway::fixtures(TrackerKind::Jira, its_dir());
    let fixed = gw.fetch("HADOOP-6223").unwrap();
    assert_eq!(fixed.evidence(), "status=Resolved, resolution=Fixed");
    assert_eq!(fixed.resolved_date.unwrap().to_rfc3339(), "2009-10-15T21:30:57+00:00");
    assert!(is_ready_to_remove(&gw.fetch("HADOOP-1230").unwrap()));
    let open = gw.fetch("HADOOP-11938").unwrap();
    assert_eq!(open.raw_resolution, None);
    assert!(!is_ready_to_remove(&open));
}

#[test]
fn other_trackers() {
    let gh = Gateway::fixtures(TrackerKind::Github, its_dir());
    assert!(!is_ready_to_remove(&gh.fetch("3251").unwrap()));
    assert!(is_ready_to_remove(&gh.fetch("55").unwrap()));
    let bz = Gateway::fixtures(TrackerKind::Bugzilla, its_dir());
    let wontfix = bz.fetch("51687").unwrap();
    assert_eq!(wontfix.raw_resolution.as_deref(), Some("WONTFIX"));
    assert!(!is_ready_to_remove(&wontfix));
}

#[test]
fn missing_fixture_is_not_found() {
    let gw = Gateway::fixtures(TrackerKind::Jira, its_dir());
    assert!(matches!(gw.fetch("HADOOP-1"), Err(ItsError::NotFound { .. })));
}

#[test]
fn fetch_all_keeps_key_order() {
    let gw = Gateway::fixtures(TrackerKind::Jira, its_dir()).with_concurrency(2);
    let keys: Vec<String> = ["HADOOP-11938", "HADOOP-1", "HADOOP-6223", "HADOOP-1230"].map(String::from).into();
    let got = gw.fetch_all(&keys);
    let order: Vec<&str> = got.iter().map(|(k, _)| k.as_str()).collect();
    assert_eq!(order, keys.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(got[1].1.is_err());
    assert!(got[2].1.as_ref().unwrap().raw_status == "Resolved");
}

#[test]
fn mined_comments_to_report() {
    let repo = common::sample_repo();
    let patterns = PatternSet::build(TrackerKind::Jira, "HADOOP").unwrap();
    let comments: Vec<OnHoldComment> = mine_repository(repo.path(), "main", &patterns)
        .unwrap()
        .iter()
        .filter(|l| !l.is_removed())
        .map(|l| OnHoldComment::from_lifecycle(l, &patterns))
        .collect();
    let keys: Vec<String> = comments.iter().flat_map(|c| c.issue_keys.clone()).collect();
    let records = Gateway::fixtures(TrackerKind::Jira, its_dir()).fetch_all(&keys);
    let recs = recommend(&comments, &records);
    let verdicts: Vec<(&str, bool)> = recs.iter().map(|r| (r.issue.key.as_str(), r.ready)).collect();
    assert_eq!(verdicts, [("HADOOP-1230", true), ("HADOOP-11938", false)]);
    let md = render_report(&recs, ReportFormat::Markdown);
    assert!(md.contains("2 finding(s), 1 ready to be removed"));
    assert!(md.contains("Fs.java:"));
}
