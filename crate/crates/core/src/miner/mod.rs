//! Git history mining: Java comment extraction and comment lifecycles.

mod history;
mod lexer;
mod lifecycle;

use std::path::{Path, PathBuf};

pub use history::{walk_history, ChangeKind, CommitRecord, FileChange, GitSnapshots, SnapshotSource};
pub use lexer::{extract_comments, extract_comments_in, is_test_file, CommentBlock};
pub use lifecycle::{trace_lifecycles, CommentLifecycle, LifecycleCounts};

use crate::linker::PatternSet;

#[derive(Debug, thiserror::Error)]
pub enum MinerError {
    #[error("not a git repository: {0}")]
    NotARepository(PathBuf),
    #[error("branch not found: {0}")]
    MissingBranch(String),
    #[error("git: {0}")]
    Git(String),
}

/// Walk `branch` of `repo` and trace every comment that references an issue
/// matched by `patterns`.
pub fn mine_repository(
    repo: &Path,
    branch: &str,
    patterns: &PatternSet,
) -> Result<Vec<CommentLifecycle>, MinerError> {
    let history = walk_history(repo, branch)?;
    if history.is_empty() {
        return Ok(Vec::new());
    }
    let mut snapshots = GitSnapshots::open(repo)?;
    let mut lifecycles = trace_lifecycles(&history, &mut snapshots, |text| {
        patterns.references_issue(text)
    })?;
    // Deterministic output order: by introduction (history order), then path, then line.
    let order: std::collections::HashMap<&str, usize> = history
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.as_str(), i))
        .collect();
    lifecycles.sort_by(|a, b| {
        order[a.introduced_commit.as_str()]
            .cmp(&order[b.introduced_commit.as_str()])
            .then_with(|| a.block.file_path.cmp(&b.block.file_path))
            .then_with(|| a.block.start_line.cmp(&b.block.start_line))
            .then_with(|| a.block.normalized_text.cmp(&b.block.normalized_text))
    });
    Ok(lifecycles)
}
