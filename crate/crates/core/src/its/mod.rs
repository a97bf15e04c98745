//! Issue-tracker lookups and the ready-to-remove decision.

mod gateway;
mod parse;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use gateway::{
    DiskCache, Gateway, HttpResponse, Transport, TrackerEndpoint, UreqTransport, DEFAULT_CACHE_TTL,
    DEFAULT_CONCURRENCY,
};
pub use parse::parse_issue;

use crate::linker::{PatternSet, TrackerKind};
use crate::miner::CommentLifecycle;
use crate::stats::IssueOutcome;

const READY_STATUSES: [&str; 3] = ["resolved", "closed", "verified"];

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ItsError {
    #[error("issue {key} not found")]
    NotFound { key: String },
    #[error("tracker refused access (HTTP {status}); set {env_var}")]
    Auth { status: u16, env_var: &'static str },
    #[error("issue {key}: tracker unavailable after {attempts} attempts (HTTP {status})")]
    Temporary { key: String, attempts: usize, status: u16 },
    #[error("issue {key}: unexpected HTTP {status}")]
    Http { key: String, status: u16 },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("issue {key}: malformed response: {message}")]
    Parse { key: String, message: String },
    #[error("{0}")]
    Io(String),
    #[error("no API base URL configured for {0}")]
    MissingBaseUrl(TrackerKind),
}

impl ItsError {
    /// Whether the problem lies with the environment (network, credentials,
    /// files) rather than with the request.
    pub fn is_environmental(&self) -> bool {
        !matches!(self, ItsError::NotFound { .. } | ItsError::Parse { .. })
    }
}

/// Environment variable holding the API token for a tracker.
pub fn token_env_var(tracker: TrackerKind) -> &'static str {
    match tracker {
        TrackerKind::Bugzilla => "ITS_BUGZILLA_TOKEN",
        TrackerKind::Github => "ITS_GITHUB_TOKEN",
        TrackerKind::Jira => "ITS_JIRA_TOKEN",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssueRecord {
    pub tracker: TrackerKind,
    pub key: String,
    pub raw_status: String,
    pub raw_resolution: Option<String>,
    pub resolved_date: Option<DateTime<Utc>>,
    pub fetched_at: DateTime<Utc>,
}

impl IssueRecord {
    /// `status=..` followed by `, resolution=..` when there is one.
    pub fn evidence(&self) -> String {
        match &self.raw_resolution {
            Some(r) => format!("status={}, resolution={}", self.raw_status, r),
            None => format!("status={}", self.raw_status),
        }
    }

    pub fn outcome(&self) -> IssueOutcome {
        IssueOutcome {
            resolved: is_ready_to_remove(self),
            resolved_date: self.resolved_date,
        }
    }
}

fn norm(s: &str) -> String {
    s.trim().to_lowercase()
}

/// The issue is closed-like and, where the tracker records a resolution,
/// it was fixed. GitHub has no resolution field, so its status decides.
pub fn is_ready_to_remove(record: &IssueRecord) -> bool {
    if !READY_STATUSES.contains(&norm(&record.raw_status).as_str()) {
        return false;
    }
    if !record.tracker.has_resolution_field() {
        return true;
    }
    record.raw_resolution.as_deref().map(norm).as_deref() == Some("fixed")
}

/// A remaining On-hold comment and the issues it waits on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnHoldComment {
    pub file_path: String,
    pub line: usize,
    pub text: String,
    pub issue_keys: Vec<String>,
}

impl OnHoldComment {
    pub fn from_lifecycle(lifecycle: &CommentLifecycle, patterns: &PatternSet) -> Self {
        let mut issue_keys: Vec<String> = Vec::new();
        for r in patterns.find_issue_references(&lifecycle.block.raw_text) {
            if !issue_keys.contains(&r.key()) {
                issue_keys.push(r.key());
            }
        }
        Self {
            file_path: lifecycle.block.file_path.clone(),
            line: lifecycle.block.start_line,
            text: lifecycle.block.raw_text.clone(),
            issue_keys,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub comment: OnHoldComment,
    pub issue: IssueRecord,
    pub ready: bool,
    pub evidence: String,
    pub draft_report: String,
}

/// A maintainer-facing note: what the comment says, where it is, and why
/// it can go.
pub fn draft_report(comment: &OnHoldComment, record: &IssueRecord) -> String {
    let quoted: Vec<String> = comment.text.lines().map(|l| format!("> {l}")).collect();
    format!(
        "Title: Remove obsolete comment waiting on {key}\n\n\
         The following comment waits on {key}:\n\n{quote}\n\n\
         Location: {path}:{line}\n\n\
         {key} is now {evidence}, so the condition the comment waits for \
         appears to be met. The comment can likely be removed, together \
         with any workaround it describes.\n",
        key = record.key,
        quote = quoted.join("\n"),
        path = comment.file_path,
        line = comment.line,
        evidence = record.evidence(),
    )
}

/// Pair each comment with each of its fetched issues. Comments whose issue
/// could not be fetched are left out with a warning.
pub fn recommend(
    comments: &[OnHoldComment],
    records: &[(String, Result<IssueRecord, ItsError>)],
) -> Vec<Recommendation> {
    let mut out = Vec::new();
    for comment in comments {
        for key in &comment.issue_keys {
            match records.iter().find(|(k, _)| k == key).map(|(_, r)| r) {
                Some(Ok(record)) => {
                    let ready = is_ready_to_remove(record);
                    out.push(Recommendation {
                        comment: comment.clone(),
                        issue: record.clone(),
                        ready,
                        evidence: record.evidence(),
                        draft_report: if ready { draft_report(comment, record) } else { String::new() },
                    });
                }
                Some(Err(e)) => {
                    log::warn!("skipping {}:{}: {e}", comment.file_path, comment.line);
                }
                None => {
                    log::warn!("skipping {}:{}: issue {key} was not looked up", comment.file_path, comment.line);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(tracker: TrackerKind, status: &str, resolution: Option<&str>) -> IssueRecord {
        IssueRecord {
            tracker,
            key: "HADOOP-6223".into(),
            raw_status: status.into(),
            raw_resolution: resolution.map(str::to_string),
            resolved_date: None,
            fetched_at: Utc::now(),
        }
    }

    #[test]
    fn ready_truth_table() {
        for tracker in TrackerKind::ALL {
            for status in ["open", "resolved", "closed", "verified"] {
                for resolution in [Some("fixed"), Some("wontfix"), None] {
                    let got = is_ready_to_remove(&record(tracker, status, resolution));
                    let closed_like = status != "open";
                    let expected = closed_like && (tracker == TrackerKind::Github || resolution == Some("fixed"));
                    assert_eq!(got, expected, "{tracker} {status} {resolution:?}");
                }
            }
        }
    }

    #[test]
    fn comparison_ignores_case_and_space() {
        assert!(is_ready_to_remove(&record(TrackerKind::Jira, " Resolved ", Some("Fixed"))));
        assert!(!is_ready_to_remove(&record(TrackerKind::Jira, "Open", None)));
        assert!(!is_ready_to_remove(&record(TrackerKind::Jira, "Closed", Some("WontFix"))));
    }

    #[test]
    fn recommendations() {
        let comment = OnHoldComment {
            file_path: "src/Fs.java".into(),
            line: 12,
            text: "/* return type will change to AFS once HADOOP-6223 is completed */".into(),
            issue_keys: vec!["HADOOP-6223".into()],
        };
        let open = OnHoldComment {
            issue_keys: vec!["7".into()],
            ..comment.clone()
        };
        let missing = OnHoldComment {
            issue_keys: vec!["HADOOP-1".into()],
            ..comment.clone()
        };
        let mut gh = record(TrackerKind::Github, "open", None);
        gh.key = "7".into();
        let records = vec![
            ("HADOOP-6223".to_string(), Ok(record(TrackerKind::Jira, "Resolved", Some("Fixed")))),
            ("7".to_string(), Ok(gh)),
            ("HADOOP-1".to_string(), Err(ItsError::NotFound { key: "HADOOP-1".into() })),
        ];
        let recs = recommend(&[comment, open, missing], &records);
        assert_eq!(recs.len(), 2);
        assert!(recs[0].ready);
        assert_eq!(recs[0].evidence, "status=Resolved, resolution=Fixed");
        assert!(recs[0].draft_report.contains("HADOOP-6223"));
        assert!(recs[0].draft_report.contains("src/Fs.java:12"));
        assert!(!recs[1].ready);
        assert_eq!(recs[1].evidence, "status=open");
    }
}
