use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use chrono::{DateTime, TimeZone, Utc};

use super::MinerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChangeKind {
    Modified,
    Deleted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileChange {
    pub path: String,
    pub kind: ChangeKind,
}

/// One commit on the first-parent chain, with the Java files it touched
/// relative to its first parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitRecord {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub changes: Vec<FileChange>,
}

/// Anything that can hand back a file's content as of a commit.
pub trait SnapshotSource {
    fn read_file(&mut self, commit: &str, path: &str) -> Result<Option<String>, MinerError>;
}

fn git(repo: &Path) -> Command {
    let mut cmd = Command::new("git");
    cmd.arg("-C").arg(repo);
    cmd
}

fn run_git(repo: &Path, args: &[&str]) -> Result<std::process::Output, MinerError> {
    git(repo)
        .args(args)
        .output()
        .map_err(|e| MinerError::Git(format!("failed to spawn git: {e}")))
}

/// Walk the first-parent chain of `branch`, oldest commit first.
///
/// Merge commits are diffed against their first parent only; the merged
/// side branch is never visited. Renames are not detected, so a renamed
/// file shows up as a deletion plus a new file.
pub fn walk_history(repo: &Path, branch: &str) -> Result<Vec<CommitRecord>, MinerError> {
    let inside = run_git(repo, &["rev-parse", "--git-dir"])?;
    if !inside.status.success() {
        return Err(MinerError::NotARepository(repo.to_path_buf()));
    }
    let verify = run_git(repo, &["rev-parse", "--verify", "--quiet", &format!("{branch}^{{commit}}")])?;
    if !verify.status.success() {
        let any = run_git(repo, &["rev-parse", "--verify", "--quiet", "HEAD"])?;
        let refs = run_git(repo, &["for-each-ref", "--count=1"])?;
        if !any.status.success() && refs.stdout.is_empty() {
            // No commits at all.
            return Ok(Vec::new());
        }
        return Err(MinerError::MissingBranch(branch.to_string()));
    }

    let output = run_git(
        repo,
        &[
            "-c",
            "core.quotePath=false",
            "log",
            "--first-parent",
            "--reverse",
            "--topo-order",
            "--diff-merges=first-parent",
            "--no-renames",
            "--name-status",
            "--format=%x00%H %ct",
            branch,
            "--",
        ],
    )?;
    if !output.status.success() {
        return Err(MinerError::Git(String::from_utf8_lossy(&output.stderr).into_owned()));
    }
    parse_log(&String::from_utf8_lossy(&output.stdout))
}

fn parse_log(text: &str) -> Result<Vec<CommitRecord>, MinerError> {
    let mut commits = Vec::new();
    for chunk in text.split('\0').filter(|c| !c.trim().is_empty()) {
        let mut lines = chunk.lines();
        let header = lines.next().unwrap_or_default();
        let (id, ts) = header
            .split_once(' ')
            .ok_or_else(|| MinerError::Git(format!("unexpected log header: {header:?}")))?;
        let secs: i64 = ts
            .trim()
            .parse()
            .map_err(|_| MinerError::Git(format!("bad commit timestamp: {ts:?}")))?;
        let timestamp = Utc
            .timestamp_opt(secs, 0)
            .single()
            .ok_or_else(|| MinerError::Git(format!("bad commit timestamp: {ts:?}")))?;
        let mut changes = Vec::new();
        for line in lines {
            let Some((status, path)) = line.split_once('\t') else {
                continue;
            };
            if !path.ends_with(".java") {
                continue;
            }
            let kind = if status.starts_with('D') {
                ChangeKind::Deleted
            } else {
                ChangeKind::Modified
            };
            changes.push(FileChange {
                path: path.to_string(),
                kind,
            });
        }
        commits.push(CommitRecord {
            id: id.to_string(),
            timestamp,
            changes,
        });
    }
    Ok(commits)
}

/// Reads blobs through a long-lived `git cat-file --batch` process.
pub struct GitSnapshots {
    repo: PathBuf,
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl GitSnapshots {
    pub fn open(repo: &Path) -> Result<Self, MinerError> {
        let mut child = git(repo)
            .args(["cat-file", "--batch"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| MinerError::Git(format!("failed to spawn git cat-file: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self {
            repo: repo.to_path_buf(),
            child,
            stdin,
            stdout,
        })
    }

    pub fn repo(&self) -> &Path {
        &self.repo
    }
}

impl SnapshotSource for GitSnapshots {
    fn read_file(&mut self, commit: &str, path: &str) -> Result<Option<String>, MinerError> {
        let io = |e: std::io::Error| MinerError::Git(format!("git cat-file: {e}"));
        writeln!(self.stdin, "{commit}:{path}").map_err(io)?;
        self.stdin.flush().map_err(io)?;
        let mut header = String::new();
        self.stdout.read_line(&mut header).map_err(io)?;
        let header = header.trim_end();
        if header.ends_with(" missing") || header.is_empty() {
            return Ok(None);
        }
        let size: usize = header
            .rsplit(' ')
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| MinerError::Git(format!("unexpected cat-file header: {header:?}")))?;
        let mut buf = vec![0u8; size + 1];
        self.stdout.read_exact(&mut buf).map_err(io)?;
        buf.truncate(size);
        Ok(Some(String::from_utf8_lossy(&buf).into_owned()))
    }
}

impl Drop for GitSnapshots {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
