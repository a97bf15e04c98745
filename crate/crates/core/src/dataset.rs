//! The comment dataset as tab-separated text.
//!
//! One header row, then one comment per row. Inside fields, backslash
//! escapes encode newline (`\n`), carriage return (`\r`), tab (`\t`) and
//! backslash (`\\`). Timestamps are ISO-8601 UTC. Headers are matched
//! loosely, so common spellings such as `Referred Issue` or `annotation`
//! are accepted.

use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::learner::Label;
use crate::linker::PatternSet;
use crate::miner::CommentLifecycle;
use crate::stats::IssueOutcome;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub comment: String,
    pub file_path: String,
    pub line: usize,
    /// Referenced issue keys; usually one.
    pub issue_keys: Vec<String>,
    pub label: Option<Label>,
    pub introduced_commit: Option<String>,
    pub introduced_date: Option<DateTime<Utc>>,
    pub removed_commit: Option<String>,
    pub removed_date: Option<DateTime<Utc>>,
    pub issue_status: Option<String>,
    pub issue_resolution: Option<String>,
    pub issue_resolved_date: Option<DateTime<Utc>>,
    /// Classifier score, when the row is a prediction.
    pub score: Option<f64>,
}

impl DatasetRow {
    pub fn new(comment: impl Into<String>, file_path: impl Into<String>, line: usize) -> Self {
        Self {
            comment: comment.into(),
            file_path: file_path.into(),
            line,
            issue_keys: Vec::new(),
            label: None,
            introduced_commit: None,
            introduced_date: None,
            removed_commit: None,
            removed_date: None,
            issue_status: None,
            issue_resolution: None,
            issue_resolved_date: None,
            score: None,
        }
    }

    pub fn is_removed(&self) -> bool {
        self.removed_date.is_some() || self.removed_commit.is_some()
    }

    /// A mined comment, keyed by the issues `patterns` finds in it.
    pub fn from_lifecycle(lifecycle: &CommentLifecycle, patterns: &PatternSet) -> Self {
        let mut row = DatasetRow::new(
            lifecycle.block.raw_text.clone(),
            lifecycle.block.file_path.clone(),
            lifecycle.block.start_line,
        );
        for r in patterns.find_issue_references(&lifecycle.block.raw_text) {
            if !row.issue_keys.contains(&r.key()) {
                row.issue_keys.push(r.key());
            }
        }
        row.introduced_commit = Some(lifecycle.introduced_commit.clone());
        row.introduced_date = Some(lifecycle.introduced_date);
        row.removed_commit = lifecycle.removed_commit.clone();
        row.removed_date = lifecycle.removed_date;
        row
    }

    /// The recorded fate of the referenced issue, if a status was recorded.
    /// Resolved means closed-like and, when a resolution is recorded,
    /// fixed; rows carry no tracker, so a missing resolution is read as a
    /// tracker without that field.
    pub fn issue_outcome(&self) -> Option<IssueOutcome> {
        let status = self.issue_status.as_deref()?.trim().to_lowercase();
        let closed = matches!(status.as_str(), "resolved" | "closed" | "verified");
        let fixed = self
            .issue_resolution
            .as_deref()
            .is_none_or(|r| r.trim().eq_ignore_ascii_case("fixed"));
        Some(IssueOutcome {
            resolved: closed && fixed,
            resolved_date: self.issue_resolved_date,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("missing required column(s): {}", .0.join(", "))]
    MissingColumns(Vec<String>),
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("empty file: no header row")]
    NoHeader,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Comment,
    FilePath,
    Line,
    IssueKey,
    Label,
    IntroducedCommit,
    IntroducedDate,
    RemovedCommit,
    RemovedDate,
    IssueStatus,
    IssueResolution,
    IssueResolvedDate,
    Score,
}

/// Canonical header names, in output order.
const COLUMNS: [(Column, &str); 13] = [
    (Column::Comment, "comment"),
    (Column::FilePath, "file_path"),
    (Column::Line, "line"),
    (Column::IssueKey, "issue_key"),
    (Column::Label, "label"),
    (Column::IntroducedCommit, "introduced_commit"),
    (Column::IntroducedDate, "introduced_date"),
    (Column::RemovedCommit, "removed_commit"),
    (Column::RemovedDate, "removed_date"),
    (Column::IssueStatus, "issue_status"),
    (Column::IssueResolution, "issue_resolution"),
    (Column::IssueResolvedDate, "issue_resolved_date"),
    (Column::Score, "score"),
];

fn column_for(header: &str) -> Option<Column> {
    let key: String = header
        .trim()
        .to_lowercase()
        .chars()
        .map(|c| if c == ' ' || c == '-' { '_' } else { c })
        .collect();
    let col = match key.as_str() {
        "comment" | "comment_text" | "comment_context" | "text" | "content" => Column::Comment,
        "file_path" | "file" | "path" | "code_file_path" | "filepath" => Column::FilePath,
        "line" | "line_number" | "line_no" | "lineno" => Column::Line,
        "issue_key" | "issue" | "referred_issue" | "issue_id" | "issue_keys" | "referenced_issue" => Column::IssueKey,
        "label" | "annotation" | "class" => Column::Label,
        "introduced_commit" | "introducing_commit" => Column::IntroducedCommit,
        "introduced_date" | "introduced" | "introduction_date" | "introduced_time" => Column::IntroducedDate,
        "removed_commit" | "removing_commit" => Column::RemovedCommit,
        "removed_date" | "removed" | "removal_date" | "removed_time" => Column::RemovedDate,
        "issue_status" | "status" => Column::IssueStatus,
        "issue_resolution" | "resolution" => Column::IssueResolution,
        "issue_resolved_date" | "resolved_date" | "resolution_date" => Column::IssueResolvedDate,
        "score" => Column::Score,
        _ => return None,
    };
    Some(col)
}

pub fn escape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for c in field.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape`]; an unknown escape is kept as written.
pub fn unescape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

pub fn format_date(d: &DateTime<Utc>) -> String {
    d.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// RFC 3339, or a bare `YYYY-MM-DD` taken as midnight UTC.
pub fn parse_date(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|d| d.with_timezone(&Utc))
        .or_else(|_| {
            NaiveDate::parse_from_str(s, "%Y-%m-%d").map(|d| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc())
        })
        .map_err(|_| format!("bad date {s:?}, expected ISO-8601"))
}

/// Parse dataset text. With `require_label`, a `label` column and a label
/// on every row are mandatory.
pub fn parse_dataset(text: &str, require_label: bool) -> Result<Vec<DatasetRow>, DatasetError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(DatasetError::NoHeader)?;
    let columns: Vec<Option<Column>> = header.split('\t').map(column_for).collect();
    let mut required = vec![Column::Comment, Column::FilePath, Column::Line, Column::IssueKey];
    if require_label {
        required.push(Column::Label);
    }
    let missing: Vec<String> = COLUMNS
        .iter()
        .filter(|(c, _)| required.contains(c) && !columns.contains(&Some(*c)))
        .map(|(_, name)| name.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(DatasetError::MissingColumns(missing));
    }

    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let bad = |message: String| DatasetError::Row { line, message };
        let fields: Vec<&str> = raw.trim_end_matches('\r').split('\t').collect();
        if fields.len() > columns.len() {
            return Err(bad(format!("{} fields but {} columns", fields.len(), columns.len())));
        }
        let mut row = DatasetRow::new("", "", 0);
        for (col, field) in columns.iter().zip(fields.iter().copied().chain(std::iter::repeat(""))) {
            let Some(col) = col else { continue };
            let value = unescape(field.trim_end_matches('\r'));
            let opt = || Some(value.trim().to_string()).filter(|s| !s.is_empty());
            let date = |v: Option<String>| v.map(|s| parse_date(&s)).transpose().map_err(bad);
            match col {
                Column::Comment => row.comment = value.clone(),
                Column::FilePath => row.file_path = value.trim().to_string(),
                Column::Line => {
                    row.line = value
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("bad line number {value:?}")))?
                }
                Column::IssueKey => {
                    row.issue_keys = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::to_string)
                        .collect()
                }
                Column::Label => {
                    row.label = opt()
                        .map(|s| s.parse::<Label>())
                        .transpose()
                        .map_err(|e| bad(e.to_string()))?
                }
                Column::IntroducedCommit => row.introduced_commit = opt(),
                Column::IntroducedDate => row.introduced_date = date(opt())?,
                Column::RemovedCommit => row.removed_commit = opt(),
                Column::RemovedDate => row.removed_date = date(opt())?,
                Column::IssueStatus => row.issue_status = opt(),
                Column::IssueResolution => row.issue_resolution = opt(),
                Column::IssueResolvedDate => row.issue_resolved_date = date(opt())?,
                Column::Score => {
                    row.score = opt()
                        .map(|s| s.parse::<f64>())
                        .transpose()
                        .map_err(|_| bad(format!("bad score {value:?}")))?
                }
            }
        }
        if row.comment.trim().is_empty() {
            return Err(DatasetError::Row { line, message: "empty comment".into() });
        }
        if require_label && row.label.is_none() {
            return Err(DatasetError::Row { line, message: "missing label".into() });
        }
        if row.removed_commit.is_some() && row.removed_date.is_none() {
            return Err(DatasetError::Row {
                line,
                message: "removed_commit without removed_date".into(),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

fn read(path: &Path) -> Result<String, DatasetError> {
    std::fs::read_to_string(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Load a labeled dataset.
pub fn load_dataset(path: &Path) -> Result<Vec<DatasetRow>, DatasetError> {
    parse_dataset(&read(path)?, true)
}

/// Load rows that may lack labels, such as mined comments.
pub fn load_unlabeled(path: &Path) -> Result<Vec<DatasetRow>, DatasetError> {
    parse_dataset(&read(path)?, false)
}

/// All columns, always in the same order.
pub fn render_dataset(rows: &[DatasetRow]) -> String {
    let mut out = COLUMNS.iter().map(|(_, n)| *n).collect::<Vec<_>>().join("\t");
    out.push('\n');
    let text = |v: &Option<String>| v.as_deref().map(escape).unwrap_or_default();
    let date = |v: &Option<DateTime<Utc>>| v.as_ref().map(format_date).unwrap_or_default();
    for r in rows {
        let fields = [
            escape(&r.comment),
            escape(&r.file_path),
            r.line.to_string(),
            escape(&r.issue_keys.join(",")),
            r.label.map(|l| l.as_str().to_string()).unwrap_or_default(),
            text(&r.introduced_commit),
            date(&r.introduced_date),
            text(&r.removed_commit),
            date(&r.removed_date),
            text(&r.issue_status),
            text(&r.issue_resolution),
            date(&r.issue_resolved_date),
            r.score.map(|s| s.to_string()).unwrap_or_default(),
        ];
        let _ = writeln!(out, "{}", fields.join("\t"));
    }
    out
}

pub fn save_dataset(rows: &[DatasetRow], path: &Path) -> Result<(), DatasetError> {
    std::fs::write(path, render_dataset(rows)).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
