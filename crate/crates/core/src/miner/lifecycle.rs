use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::history::{ChangeKind, CommitRecord, SnapshotSource};
use super::lexer::{extract_comments_in, is_test_file, CommentBlock};
use super::MinerError;

/// The span of history during which an issue-referencing comment existed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentLifecycle {
    /// Latest observed position and text of the comment.
    pub block: CommentBlock,
    pub introduced_commit: String,
    pub introduced_date: DateTime<Utc>,
    pub removed_commit: Option<String>,
    pub removed_date: Option<DateTime<Utc>>,
    /// The same comment text appeared more than once in the file.
    pub ambiguous: bool,
}

impl CommentLifecycle {
    pub fn is_removed(&self) -> bool {
        self.removed_commit.is_some()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LifecycleCounts {
    pub remaining: usize,
    pub removed: usize,
}

impl LifecycleCounts {
    pub fn of(lifecycles: &[CommentLifecycle]) -> Self {
        let removed = lifecycles.iter().filter(|l| l.is_removed()).count();
        Self {
            remaining: lifecycles.len() - removed,
            removed,
        }
    }

    pub fn total(&self) -> usize {
        self.remaining + self.removed
    }
}

/// Follow every issue-referencing comment through `history`.
///
/// A comment is identified by its file path plus whitespace-collapsed
/// text. It is introduced by the first commit where that identity shows
/// up and removed by the first later commit where it is gone, including
/// when the file itself is deleted. Test files are skipped.
pub fn trace_lifecycles<S, F>(
    history: &[CommitRecord],
    snapshots: &mut S,
    references_issue: F,
) -> Result<Vec<CommentLifecycle>, MinerError>
where
    S: SnapshotSource + ?Sized,
    F: Fn(&str) -> bool,
{
    let mut lifecycles: Vec<CommentLifecycle> = Vec::new();
    // path -> identity text -> index into `lifecycles`
    let mut open: HashMap<String, BTreeMap<String, usize>> = HashMap::new();

    for commit in history {
        for change in &commit.changes {
            if is_test_file(&change.path) {
                continue;
            }
            let current: BTreeMap<String, (CommentBlock, usize)> = match change.kind {
                ChangeKind::Deleted => BTreeMap::new(),
                ChangeKind::Modified => match snapshots.read_file(&commit.id, &change.path)? {
                    Some(source) => referencing_blocks(&source, &change.path, &references_issue),
                    None => BTreeMap::new(),
                },
            };
            let active = open.entry(change.path.clone()).or_default();

            let gone: Vec<String> = active
                .keys()
                .filter(|k| !current.contains_key(*k))
                .cloned()
                .collect();
            for key in gone {
                let idx = active.remove(&key).expect("key taken from map");
                let lc = &mut lifecycles[idx];
                lc.removed_commit = Some(commit.id.clone());
                lc.removed_date = Some(commit.timestamp.max(lc.introduced_date));
            }

            for (key, (block, count)) in current {
                match active.get(&key) {
                    Some(&idx) => {
                        let lc = &mut lifecycles[idx];
                        lc.block = block;
                        lc.ambiguous |= count > 1;
                    }
                    None => {
                        active.insert(key, lifecycles.len());
                        lifecycles.push(CommentLifecycle {
                            block,
                            introduced_commit: commit.id.clone(),
                            introduced_date: commit.timestamp,
                            removed_commit: None,
                            removed_date: None,
                            ambiguous: count > 1,
                        });
                    }
                }
            }
            if active.is_empty() {
                open.remove(&change.path);
            }
        }
    }
    Ok(lifecycles)
}

/// Issue-referencing blocks of one file keyed by identity text, keeping the
/// first occurrence and the number of occurrences.
fn referencing_blocks<F: Fn(&str) -> bool>(
    source: &str,
    path: &str,
    references_issue: &F,
) -> BTreeMap<String, (CommentBlock, usize)> {
    let mut out: BTreeMap<String, (CommentBlock, usize)> = BTreeMap::new();
    for block in extract_comments_in(source, path) {
        if !references_issue(&block.normalized_text) {
            continue;
        }
        let key = block.identity_text();
        out.entry(key)
            .and_modify(|(_, n)| *n += 1)
            .or_insert((block, 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::history::FileChange;
    use chrono::TimeZone;
    use std::collections::HashMap;

    struct MemSnapshots(HashMap<(String, String), String>);

    impl SnapshotSource for MemSnapshots {
        fn read_file(&mut self, commit: &str, path: &str) -> Result<Option<String>, MinerError> {
            Ok(self.0.get(&(commit.to_string(), path.to_string())).cloned())
        }
    }

    fn commit(id: &str, day: u32, changes: &[(&str, ChangeKind)]) -> CommitRecord {
        CommitRecord {
            id: id.into(),
            timestamp: Utc.with_ymd_and_hms(2020, 1, day, 0, 0, 0).unwrap(),
            changes: changes
                .iter()
                .map(|(p, k)| FileChange {
                    path: p.to_string(),
                    kind: *k,
                })
                .collect(),
        }
    }

    fn has_issue(text: &str) -> bool {
        text.contains("HADOOP-")
    }

    #[test]
    fn introduced_then_removed() {
        use ChangeKind::*;
        let history = vec![
            commit("A", 1, &[("src/X.java", Modified)]),
            commit("B", 2, &[("src/X.java", Modified)]),
            commit("C", 5, &[("src/X.java", Modified)]),
        ];
        let mut files = HashMap::new();
        let with = "class X {\n  // wait for HADOOP-1\n  void f() {}\n}\n";
        let moved = "class X {\n\n\n  // wait   for HADOOP-1\n  void f() {}\n}\n";
        files.insert(("A".into(), "src/X.java".into()), with.to_string());
        files.insert(("B".into(), "src/X.java".into()), moved.to_string());
        files.insert(("C".into(), "src/X.java".into()), "class X {}\n".to_string());
        let lcs = trace_lifecycles(&history, &mut MemSnapshots(files), has_issue).unwrap();
        assert_eq!(lcs.len(), 1);
        assert_eq!(lcs[0].introduced_commit, "A");
        assert_eq!(lcs[0].removed_commit.as_deref(), Some("C"));
        assert_eq!(lcs[0].block.start_line, 4);
    }

    #[test]
    fn file_deletion_removes_and_test_files_are_skipped() {
        use ChangeKind::*;
        let history = vec![
            commit("A", 1, &[("src/X.java", Modified), ("src/test/T.java", Modified)]),
            commit("B", 2, &[("src/X.java", Deleted)]),
        ];
        let mut files = HashMap::new();
        files.insert(("A".into(), "src/X.java".into()), "// HADOOP-2\n".to_string());
        files.insert(("A".into(), "src/test/T.java".into()), "// HADOOP-3\n".to_string());
        let lcs = trace_lifecycles(&history, &mut MemSnapshots(files), has_issue).unwrap();
        assert_eq!(lcs.len(), 1);
        assert_eq!(lcs[0].removed_commit.as_deref(), Some("B"));
        let counts = LifecycleCounts::of(&lcs);
        assert_eq!((counts.remaining, counts.removed, counts.total()), (0, 1, 1));
    }

    #[test]
    fn duplicate_text_is_one_ambiguous_lifecycle() {
        use ChangeKind::*;
        let history = vec![commit("A", 1, &[("X.java", Modified)])];
        let mut files = HashMap::new();
        files.insert(
            ("A".into(), "X.java".into()),
            "// see HADOOP-9\nint a;\n// see HADOOP-9\n".to_string(),
        );
        let lcs = trace_lifecycles(&history, &mut MemSnapshots(files), has_issue).unwrap();
        assert_eq!(lcs.len(), 1);
        assert!(lcs[0].ambiguous);
        assert!(!lcs[0].is_removed());
    }

    #[test]
    fn reintroduced_comment_starts_a_new_lifecycle() {
        use ChangeKind::*;
        let history = vec![
            commit("A", 1, &[("X.java", Modified)]),
            commit("B", 2, &[("X.java", Modified)]),
            commit("C", 3, &[("X.java", Modified)]),
        ];
        let mut files = HashMap::new();
        files.insert(("A".into(), "X.java".into()), "// HADOOP-5\n".to_string());
        files.insert(("B".into(), "X.java".into()), "int x;\n".to_string());
        files.insert(("C".into(), "X.java".into()), "// HADOOP-5\n".to_string());
        let lcs = trace_lifecycles(&history, &mut MemSnapshots(files), has_issue).unwrap();
        assert_eq!(lcs.len(), 2);
        assert_eq!(lcs[0].removed_commit.as_deref(), Some("B"));
        assert_eq!(lcs[1].introduced_commit, "C");
    }
}
