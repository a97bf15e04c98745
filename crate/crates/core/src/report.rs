//! Maintainer-facing reports of ready-to-remove comments, as Markdown or as
//! JSON matching `schema/report.schema.json`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::dataset::format_date;
use crate::its::{is_ready_to_remove, Recommendation};

pub const REPORT_SCHEMA_VERSION: &str = "1.0";

/// The JSON schema reports are validated against.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format {other:?}; expected markdown or json")),
        }
    }
}

fn suggested_action(rec: &Recommendation) -> String {
    if rec.ready {
        format!(
            "Remove the comment. It is ready to be removed because {} is {}.",
            rec.issue.key,
            rec.evidence
        )
    } else {
        format!("Keep the comment for now; {} is {}.", rec.issue.key, rec.evidence)
    }
}

#[derive(Serialize)]
struct JsonIssue<'a> {
    tracker: &'a str,
    key: &'a str,
    status: &'a str,
    resolution: Option<&'a str>,
    resolved_date: Option<String>,
}

#[derive(Serialize)]
struct JsonFinding<'a> {
    file_path: &'a str,
    line: usize,
    comment: &'a str,
    issue: JsonIssue<'a>,
    ready: bool,
    evidence: &'a str,
    suggested_action: String,
    draft_report: &'a str,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema_version: &'static str,
    findings: usize,
    ready: usize,
    recommendations: Vec<JsonFinding<'a>>,
}

fn render_json(recs: &[Recommendation]) -> String {
    let report = JsonReport {
        schema_version: REPORT_SCHEMA_VERSION,
        findings: recs.len(),
        ready: recs.iter().filter(|r| r.ready).count(),
        recommendations: recs
            .iter()
            .map(|r| JsonFinding {
                file_path: &r.comment.file_path,
                line: r.comment.line,
                comment: &r.comment.text,
                issue: JsonIssue {
                    tracker: r.issue.tracker.as_str(),
                    key: &r.issue.key,
                    status: &r.issue.raw_status,
                    resolution: r.issue.raw_resolution.as_deref(),
                    resolved_date: r.issue.resolved_date.as_ref().map(format_date),
                },
                ready: r.ready,
                evidence: &r.evidence,
                suggested_action: suggested_action(r),
                draft_report: &r.draft_report,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    text
}

fn render_markdown(recs: &[Recommendation]) -> String {
    let mut out = String::from("# On-hold comment report\n\n");
    if recs.is_empty() {
        out.push_str("Zero findings: no On-hold comments were checked against their issues.\n");
        return out;
    }
    let ready = recs.iter().filter(|r| r.ready).count();
    let _ = writeln!(out, "{} finding(s), {ready} ready to be removed.\n", recs.len());
    for (i, r) in recs.iter().enumerate() {
        let _ = writeln!(out, "## {}. `{}:{}`\n", i + 1, r.comment.file_path, r.comment.line);
        let _ = writeln!(out, "**Comment**\n\n```java\n{}\n```\n", r.comment.text);
        let _ = writeln!(out, "**Referenced issue:** {} ({})\n", r.issue.key, r.issue.tracker);
        let _ = writeln!(out, "**Status evidence:** {}\n", r.evidence);
        let verdict = if is_ready_to_remove(&r.issue) { "ready to be removed" } else { "not ready" };
        let _ = writeln!(out, "**Verdict:** {verdict}\n");
        let _ = writeln!(out, "**Suggested action:** {}\n", suggested_action(r));
        if !r.draft_report.is_empty() {
            let quoted: Vec<String> = r.draft_report.lines().map(|l| format!("> {l}").trim_end().to_string()).collect();
            let _ = writeln!(out, "**Draft issue for maintainers**\n\n{}\n", quoted.join("\n"));
        }
    }
    out
}

pub fn render_report(recs: &[Recommendation], format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => render_markdown(recs),
        ReportFormat::Json => render_json(recs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::its::{draft_report, IssueRecord, OnHoldComment};
    use crate::linker::TrackerKind;
    use chrono::Utc;

    fn hadoop_6223() -> Recommendation {
        let comment = OnHoldComment {
            file_path: "src/java/org/apache/hadoop/fs/FileContext.java".into(),
            line: 42,
            text: "/* return type will change to AFS once HADOOP-6223 is completed */".into(),
            issue_keys: vec!["HADOOP-6223".into()],
        };
        let issue = IssueRecord {
            tracker: TrackerKind::Jira,
            key: "HADOOP-6223".into(),
            raw_status: "Resolved".into(),
            raw_resolution: Some("Fixed".into()),
            resolved_date: None,
            fetched_at: Utc::now(),
        };
        Recommendation {
            draft_report: draft_report(&comment, &issue),
            evidence: issue.evidence(),
            ready: true,
            comment,
            issue,
        }
    }

    #[test]
    fn markdown_for_ready_case() {
        let md = render_report(&[hadoop_6223()], ReportFormat::Markdown);
        assert!(md.contains("HADOOP-6223"));
        assert!(md.contains("ready to be removed"));
        assert!(md.contains("Remove the comment"));
        assert!(md.contains("FileContext.java:42"));
    }

    #[test]
    fn empty_report_says_zero() {
        assert!(render_report(&[], ReportFormat::Markdown).contains("Zero findings"));
        let json: serde_json::Value = serde_json::from_str(&render_report(&[], ReportFormat::Json)).unwrap();
        assert_eq!(json["findings"], 0);
        assert_eq!(json["schema_version"], REPORT_SCHEMA_VERSION);
    }

    #[test]
    fn json_matches_schema() {
        let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
        let validator = jsonschema::validator_for(&schema).unwrap();
        for recs in [vec![], vec![hadoop_6223()]] {
            let doc: serde_json::Value = serde_json::from_str(&render_report(&recs, ReportFormat::Json)).unwrap();
            assert!(validator.is_valid(&doc), "{doc}");
        }
        let bad = serde_json::json!({"schema_version": "1.0", "findings": 1});
        assert!(!validator.is_valid(&bad));
    }
}
