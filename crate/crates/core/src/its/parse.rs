use chrono::{DateTime, NaiveDateTime, Utc};
use serde_json::Value;

use super::{IssueRecord, ItsError};
use crate::linker::TrackerKind;

/// Tracker timestamps: RFC 3339, Jira's `+0000` offsets, or Bugzilla's
/// zoneless `YYYY-MM-DD HH:MM:SS` (taken as UTC).
fn parse_time(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    DateTime::parse_from_rfc3339(s)
        .or_else(|_| DateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f%z"))
        .map(|d| d.with_timezone(&Utc))
        .ok()
        .or_else(|| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S").ok().map(|n| n.and_utc()))
}

fn text_at<'a>(v: &'a Value, path: &[&str]) -> Option<&'a str> {
    path.iter().try_fold(v, |v, k| v.get(k))?.as_str()
}

fn non_empty(s: Option<&str>) -> Option<String> {
    s.map(str::trim).filter(|s| !s.is_empty()).map(str::to_string)
}

/// Turn a tracker's issue JSON into a record.
pub fn parse_issue(tracker: TrackerKind, key: &str, body: &str, fetched_at: DateTime<Utc>) -> Result<IssueRecord, ItsError> {
    let bad = |message: &str| ItsError::Parse {
        key: key.to_string(),
        message: message.to_string(),
    };
    let json: Value = serde_json::from_str(body).map_err(|e| bad(&e.to_string()))?;
    let (status, resolution, resolved) = match tracker {
        TrackerKind::Bugzilla => {
            let bug = json
                .get("bugs")
                .and_then(|b| b.get(0))
                .ok_or_else(|| ItsError::NotFound { key: key.to_string() })?;
            (
                text_at(bug, &["status"]),
                non_empty(text_at(bug, &["resolution"])),
                text_at(bug, &["cf_last_resolved"]).and_then(parse_time),
            )
        }
        TrackerKind::Github => (
            text_at(&json, &["state"]),
            None,
            text_at(&json, &["closed_at"]).and_then(parse_time),
        ),
        TrackerKind::Jira => (
            text_at(&json, &["fields", "status", "name"]),
            non_empty(text_at(&json, &["fields", "resolution", "name"])),
            text_at(&json, &["fields", "resolutiondate"]).and_then(parse_time),
        ),
    };
    let raw_status = status.ok_or_else(|| bad("no status field"))?.trim().to_string();
    Ok(IssueRecord {
        tracker,
        key: key.to_string(),
        raw_status,
        raw_resolution: resolution,
        resolved_date: resolved,
        fetched_at,
    })
}
