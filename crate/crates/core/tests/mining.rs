mod common;

use onhold::dataset::DatasetRow;
use onhold::linker::{PatternSet, TrackerKind};
use onhold::miner::{mine_repository, walk_history, LifecycleCounts, MinerError};

fn hadoop() -> PatternSet {
    PatternSet::build(TrackerKind::Jira, "HADOOP").unwrap()
}

#[test]
fn sample_history_lifecycles() {
    let repo = common::sample_repo();
    let found = mine_repository(repo.path(), "main", &hadoop()).unwrap();
    let texts: Vec<&str> = found.iter().map(|l| l.block.normalized_text.as_str()).collect();
    assert_eq!(
        texts,
        [
            "return type will change to AFS once HADOOP-6223 is completed",
            "see HADOOP-1230 for the background",
            "workaround until HADOOP-11938 is fixed",
        ]
    );
    assert!(found.iter().all(|l| !l.block.file_path.contains("FsTest")), "test file mined");
    assert!(texts.iter().all(|t| !t.contains("inside a string")), "string literal mined");

    let on_hold = &found[0];
    assert!(on_hold.is_removed());
    assert_eq!(on_hold.introduced_date.to_rfc3339(), "2020-01-10T08:00:00+00:00");
    assert_eq!(on_hold.removed_date.unwrap().to_rfc3339(), "2020-03-23T17:00:00+00:00");
    assert_eq!(on_hold.block.start_line, 3);

    // The side branch is not walked; the merge commit introduces its comment.
    let side = &found[2];
    assert_eq!(side.block.file_path, "src/main/java/org/example/Side.java");
    assert_eq!(side.introduced_date.to_rfc3339(), "2020-02-03T08:00:00+00:00");
    assert!(!side.is_removed());

    assert_eq!(LifecycleCounts::of(&found), LifecycleCounts { remaining: 2, removed: 1 });
}

#[test]
fn dataset_rows_carry_keys_and_dates() {
    let repo = common::sample_repo();
    let patterns = hadoop();
    let found = mine_repository(repo.path(), "main", &patterns).unwrap();
    let rows: Vec<DatasetRow> = found.iter().map(|l| DatasetRow::from_lifecycle(l, &patterns)).collect();
    assert_eq!(rows[0].issue_keys, ["HADOOP-6223"]);
    assert!(rows[0].is_removed());
    assert!(rows[0].label.is_none());
    assert_eq!(rows[2].issue_keys, ["HADOOP-11938"]);
}

#[test]
fn history_walk_is_first_parent_order() {
    let repo = common::sample_repo();
    let history = walk_history(repo.path(), "main").unwrap();
    let dates: Vec<String> = history.iter().map(|c| c.timestamp.format("%m-%d").to_string()).collect();
    assert_eq!(dates, ["01-10", "02-02", "02-03", "03-23"]);
    let merge = &history[2];
    assert_eq!(merge.changes.len(), 1);
    assert_eq!(merge.changes[0].path, "src/main/java/org/example/Side.java");
}

#[test]
fn missing_branch_and_non_repo_are_errors() {
    let repo = common::sample_repo();
    assert!(matches!(
        mine_repository(repo.path(), "nope", &hadoop()),
        Err(MinerError::MissingBranch(_))
    ));
    let empty = tempfile::tempdir().unwrap();
    assert!(matches!(
        mine_repository(empty.path(), "main", &hadoop()),
        Err(MinerError::NotARepository(_))
    ));
}
