//! Issue reference detection and term abstraction.
//!
//! Each tracker gets an id pattern and, where the tracker has a canonical
//! URL shape, a URL pattern. The literal `projectname` in the pattern
//! templates is replaced by the configured project key. All matching is
//! case-insensitive.

use std::fmt;
use std::str::FromStr;

use fancy_regex::Regex;
use serde::{Deserialize, Serialize};

pub const ISSUE_TOKEN: &str = "abstractissueid";
pub const URL_TOKEN: &str = "abstracturl";

const PLACEHOLDER: &str = "projectname";

const BUGZILLA_ID: &str = r"(?<![A-Za-z])(?:bug|projectname|bugzilla|bz)[ -](?:#)?\d+(?:\.[0-9xX*]+)*";
const BUGZILLA_URL: &str = r"https?://[\w._/]*show_bug\.cgi\?id=\d+";
const GITHUB_ID: &str = r"(?<![A-Za-z])(?:bug|issues?)[ -](?:#)?\d+(?:\.[0-9xX*]+)*";
const GITHUB_URL: &str = r"https?://github\.com/[\w._/]*/issues/\d+";
const JIRA_ID: &str = r"(?<![A-Za-z])(?:bug|projectname)[ -](?:#)?\d+(?:\.[0-9xX*]+)*";
const JIRA_URL: &str = r"https?://issues\.apache\.org/jira/browse/(?:projectname)-\d+";
const GENERIC_URL: &str = r"https?://(www\.)?[-a-zA-Z0-9@:%._\+~#=]{2,256}\.[a-z]{2,6}\b([-a-zA-Z0-9@:%_\+.~#?&//=]*)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackerKind {
    Bugzilla,
    Github,
    Jira,
}

impl TrackerKind {
    pub const ALL: [TrackerKind; 3] = [TrackerKind::Bugzilla, TrackerKind::Github, TrackerKind::Jira];

    pub fn as_str(self) -> &'static str {
        match self {
            TrackerKind::Bugzilla => "bugzilla",
            TrackerKind::Github => "github",
            TrackerKind::Jira => "jira",
        }
    }

    /// Whether the tracker records a resolution separately from the status.
    pub fn has_resolution_field(self) -> bool {
        !matches!(self, TrackerKind::Github)
    }
}

impl fmt::Display for TrackerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrackerKind {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bugzilla" => Ok(TrackerKind::Bugzilla),
            "github" => Ok(TrackerKind::Github),
            "jira" => Ok(TrackerKind::Jira),
            other => Err(PatternError::UnknownTracker(other.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PatternError {
    #[error("unknown tracker kind: {0:?}")]
    UnknownTracker(String),
    #[error("a project key is required for {0}")]
    MissingProjectKey(TrackerKind),
    #[error("pattern {source_text:?} does not compile: {message}")]
    Compile { source_text: String, message: String },
}

#[derive(Debug, Clone)]
struct CompiledPattern {
    source: String,
    regex: Regex,
    is_url: bool,
}

impl CompiledPattern {
    fn new(source: String, is_url: bool) -> Result<Self, PatternError> {
        let regex = Regex::new(&format!("(?i){source}")).map_err(|e| PatternError::Compile {
            source_text: source.clone(),
            message: e.to_string(),
        })?;
        Ok(Self {
            source,
            regex,
            is_url,
        })
    }
}

/// Instantiated detection and abstraction patterns for one project.
#[derive(Debug, Clone)]
pub struct PatternSet {
    tracker: TrackerKind,
    project_key: String,
    detection: Vec<CompiledPattern>,
    /// Issue abstraction patterns; all map to [`ISSUE_TOKEN`].
    issue_abstraction: Vec<CompiledPattern>,
    url_abstraction: CompiledPattern,
}

/// A detected tracker reference inside a comment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueReference {
    pub tracker: TrackerKind,
    pub project_key: Option<String>,
    pub issue_number: u64,
    pub matched_text: String,
    /// Byte offsets into the comment text, end exclusive.
    pub span: (usize, usize),
}

impl IssueReference {
    /// Tracker-native key: `PROJECT-N` for Jira, the bare number otherwise.
    pub fn key(&self) -> String {
        match (&self.tracker, &self.project_key) {
            (TrackerKind::Jira, Some(project)) => format!("{project}-{}", self.issue_number),
            _ => self.issue_number.to_string(),
        }
    }
}

fn instantiate(template: &str, key: &str) -> String {
    template.replace(PLACEHOLDER, &regex::escape(key))
}

/// Drop the `projectname|` alternative when no key is configured.
fn without_placeholder(template: &str) -> String {
    template.replace("|projectname", "")
}

impl PatternSet {
    pub fn build(tracker: TrackerKind, project_key: &str) -> Result<Self, PatternError> {
        let key = project_key.trim();
        if key.is_empty() && tracker == TrackerKind::Jira {
            return Err(PatternError::MissingProjectKey(tracker));
        }
        let fill = |template: &str| {
            if key.is_empty() {
                without_placeholder(template)
            } else {
                instantiate(template, key)
            }
        };
        let (id, url, abstraction_url) = match tracker {
            TrackerKind::Bugzilla => (fill(BUGZILLA_ID), Some(BUGZILLA_URL.to_string()), BUGZILLA_URL.to_string()),
            TrackerKind::Github => (GITHUB_ID.to_string(), Some(GITHUB_URL.to_string()), GITHUB_URL.to_string()),
            TrackerKind::Jira => (fill(JIRA_ID), None, fill(JIRA_URL)),
        };
        let mut detection = vec![CompiledPattern::new(id.clone(), false)?];
        if let Some(url) = url {
            detection.push(CompiledPattern::new(url, true)?);
        }
        let issue_abstraction = vec![
            CompiledPattern::new(id, false)?,
            CompiledPattern::new(abstraction_url, true)?,
        ];
        Ok(Self {
            tracker,
            project_key: key.to_string(),
            detection,
            issue_abstraction,
            url_abstraction: CompiledPattern::new(GENERIC_URL.to_string(), true)?,
        })
    }

    pub fn tracker(&self) -> TrackerKind {
        self.tracker
    }

    pub fn project_key(&self) -> &str {
        &self.project_key
    }

    pub fn detection_patterns(&self) -> Vec<&str> {
        self.detection.iter().map(|p| p.source.as_str()).collect()
    }

    /// (pattern source, replacement token) pairs in application order.
    pub fn abstraction_patterns(&self) -> Vec<(&str, &'static str)> {
        self.issue_abstraction
            .iter()
            .map(|p| (p.source.as_str(), ISSUE_TOKEN))
            .chain(std::iter::once((self.url_abstraction.source.as_str(), URL_TOKEN)))
            .collect()
    }

    pub fn references_issue(&self, text: &str) -> bool {
        self.detection
            .iter()
            .any(|p| p.regex.is_match(text).unwrap_or(false))
    }

    /// All non-overlapping references, leftmost first; where two patterns
    /// match at the same offset the longer match wins.
    pub fn find_issue_references(&self, text: &str) -> Vec<IssueReference> {
        select_spans(&self.detection, text)
            .into_iter()
            .filter_map(|(start, end, is_url)| self.to_reference(text, start, end, is_url))
            .collect()
    }

    fn to_reference(&self, text: &str, start: usize, end: usize, is_url: bool) -> Option<IssueReference> {
        let matched = &text[start..end];
        let digits = if is_url {
            last_digit_run(matched)
        } else {
            number_after_keyword(matched)
        }?;
        let issue_number: u64 = digits.parse().ok().filter(|&n| n > 0)?;
        let project_key = match self.tracker {
            TrackerKind::Jira => Some(self.project_key.to_ascii_uppercase()),
            _ => None,
        };
        Some(IssueReference {
            tracker: self.tracker,
            project_key,
            issue_number,
            matched_text: matched.to_string(),
            span: (start, end),
        })
    }

    /// Replace issue ids and issue URLs with [`ISSUE_TOKEN`], then any other
    /// URL with [`URL_TOKEN`].
    pub fn abstract_terms(&self, text: &str) -> String {
        abstract_terms_all(std::slice::from_ref(self), text)
    }

    /// Spans of `text` that issue abstraction replaces.
    pub fn issue_abstraction_spans(&self, text: &str) -> Vec<(usize, usize)> {
        select_spans(&self.issue_abstraction, text)
            .into_iter()
            .map(|(s, e, _)| (s, e))
            .collect()
    }
}

/// [`PatternSet::abstract_terms`] for comments that may cite any of several
/// projects' trackers: issue spans from every set compete together, so
/// one set's URL abstraction cannot pre-empt another's issue URL.
pub fn abstract_terms_all(sets: &[PatternSet], text: &str) -> String {
    let Some(first) = sets.first() else {
        return text.to_string();
    };
    let issue_patterns: Vec<CompiledPattern> = sets.iter().flat_map(|s| s.issue_abstraction.iter().cloned()).collect();
    let issues = replace_spans(text, &select_spans(&issue_patterns, text), ISSUE_TOKEN);
    let urls = select_spans(std::slice::from_ref(&first.url_abstraction), &issues);
    replace_spans(&issues, &urls, URL_TOKEN)
}

fn select_spans(patterns: &[CompiledPattern], text: &str) -> Vec<(usize, usize, bool)> {
    let mut candidates: Vec<(usize, usize, bool)> = Vec::new();
    for p in patterns {
        for m in p.regex.find_iter(text).flatten() {
            if m.end() > m.start() {
                candidates.push((m.start(), m.end(), p.is_url));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut chosen: Vec<(usize, usize, bool)> = Vec::new();
    for c in candidates {
        if chosen.last().is_none_or(|last| c.0 >= last.1) {
            chosen.push(c);
        }
    }
    chosen
}

fn replace_spans(text: &str, spans: &[(usize, usize, bool)], token: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for &(start, end, _) in spans {
        out.push_str(&text[cursor..start]);
        out.push_str(token);
        cursor = end;
    }
    out.push_str(&text[cursor..]);
    out
}

/// Digits following the first `-`/space separator (and optional `#`).
/// Skipping the keyword this way keeps digits inside project keys such as
/// `LOG4J2` out of the number.
fn number_after_keyword(matched: &str) -> Option<&str> {
    let sep = matched.find([' ', '-'])?;
    let rest = matched[sep + 1..].trim_start_matches('#');
    let len = rest.bytes().take_while(u8::is_ascii_digit).count();
    (len > 0).then(|| &rest[..len])
}

fn last_digit_run(matched: &str) -> Option<&str> {
    let end = matched.rfind(|c: char| c.is_ascii_digit())? + 1;
    let start = matched[..end]
        .rfind(|c: char| !c.is_ascii_digit())
        .map_or(0, |i| i + 1);
    Some(&matched[start..end])
}
