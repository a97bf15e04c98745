//! Issue detection checked against an independent matcher built on the
//! `regex` crate. That crate has no lookbehind, so the oracle anchors each
//! pattern at every start offset whose preceding byte is not a letter.

use std::sync::LazyLock;

use proptest::prelude::*;
use regex::Regex;

use onhold::linker::{PatternSet, TrackerKind};

const LOOKBEHIND: &str = "(?<![A-Za-z])";

struct Oracle {
    /// (anchored regex, needs a non-letter before the start, is a URL pattern)
    patterns: Vec<(Regex, bool, bool)>,
}

impl Oracle {
    fn new(set: &PatternSet) -> Self {
        let patterns = set
            .detection_patterns()
            .into_iter()
            .map(|p| {
                let guarded = p.starts_with(LOOKBEHIND);
                let body = p.trim_start_matches(LOOKBEHIND);
                let re = Regex::new(&format!("(?i)^(?:{body})")).expect("oracle pattern");
                (re, guarded, body.starts_with("https?"))
            })
            .collect();
        Oracle { patterns }
    }

    /// Leftmost matches, longest first at equal starts, never overlapping.
    /// Each pattern only restarts after its own previous match, as an
    /// iterator over one regex would.
    fn spans(&self, text: &str) -> Vec<(usize, usize)> {
        let mut candidates = Vec::new();
        for (re, guarded, is_url) in &self.patterns {
            let mut from = 0;
            for start in 0..=text.len() {
                if start < from || !text.is_char_boundary(start) {
                    continue;
                }
                if *guarded && start > 0 && text.as_bytes()[start - 1].is_ascii_alphabetic() {
                    continue;
                }
                if let Some(m) = re.find(&text[start..]) {
                    if !m.is_empty() {
                        from = start + m.end();
                        if issue_number(m.as_str(), *is_url) > 0 {
                            candidates.push((start, from));
                        }
                    }
                }
            }
        }
        candidates.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        let mut chosen: Vec<(usize, usize)> = Vec::new();
        for c in candidates {
            if chosen.last().is_none_or(|l| c.0 >= l.1) {
                chosen.push(c);
            }
        }
        chosen
    }
}

/// The issue number inside a match: the final digit run of a URL, or the
/// digits after the keyword's separator. Zero means no usable reference.
fn issue_number(matched: &str, is_url: bool) -> u64 {
    let digits: String = if is_url {
        let rev: String = matched.chars().rev().skip_while(|c| !c.is_ascii_digit()).take_while(char::is_ascii_digit).collect();
        rev.chars().rev().collect()
    } else {
        let after = matched.split_once([' ', '-']).map_or("", |(_, rest)| rest);
        after.trim_start_matches('#').chars().take_while(char::is_ascii_digit).collect()
    };
    digits.parse().unwrap_or(0)
}

static SETS: LazyLock<Vec<(PatternSet, Oracle)>> = LazyLock::new(|| {
    sets().into_iter().map(|s| { let o = Oracle::new(&s); (s, o) }).collect()
});

fn sets() -> Vec<PatternSet> {
    vec![
        PatternSet::build(TrackerKind::Bugzilla, "ant").unwrap(),
        PatternSet::build(TrackerKind::Github, "").unwrap(),
        PatternSet::build(TrackerKind::Jira, "HADOOP").unwrap(),
        PatternSet::build(TrackerKind::Jira, "LOG4J2").unwrap(),
    ]
}

fn fragment() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("bug".to_string()),
        Just("Bug".to_string()),
        Just("ant".to_string()),
        Just("issue".to_string()),
        Just("issues".to_string()),
        Just("HADOOP".to_string()),
        Just("LOG4J2".to_string()),
        Just("bz".to_string()),
        Just("debug".to_string()),
        Just("https://bz.apache.org/bugzilla/show_bug.cgi?id=".to_string()),
        Just("https://github.com/apache/dubbo/issues/".to_string()),
        Just("http://".to_string()),
        Just(" ".to_string()),
        Just("-".to_string()),
        Just("#".to_string()),
        Just(".".to_string()),
        Just("x".to_string()),
        Just("_".to_string()),
        Just("é".to_string()),
        "[0-9]{1,4}",
    ]
}

fn text() -> impl Strategy<Value = String> {
    proptest::collection::vec(fragment(), 0..12).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn detection_agrees_with_oracle(text in text()) {
        for (set, oracle) in SETS.iter() {
            let got: Vec<(usize, usize)> = set.find_issue_references(&text).iter().map(|r| r.span).collect();
            prop_assert_eq!(&got, &oracle.spans(&text), "{} on {:?}", set.tracker(), text);
        }
    }

    #[test]
    fn reference_text_is_the_span(text in text()) {
        for (set, _) in SETS.iter() {
            for r in set.find_issue_references(&text) {
                prop_assert_eq!(&text[r.span.0..r.span.1], r.matched_text.as_str());
                prop_assert!(r.issue_number > 0);
            }
        }
    }
}
