//! Comment normalization: term abstraction, lowercasing, special-character
//! removal, tokenization and lemmatization. Stop words are kept.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::linker::{abstract_terms_all, PatternSet, ISSUE_TOKEN, URL_TOKEN};

const BUNDLED_EXCEPTIONS: &str = include_str!("../data/lemma_exceptions.tsv");

static SPECIAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[^A-Za-z0-9]+").unwrap());

/// Gradable adjectives whose `-er`/`-est` forms are reduced.
const COMPARABLE: &[&str] = &[
    "big", "broad", "busy", "cheap", "clean", "clear", "close", "cold", "cool", "dark", "deep",
    "dirty", "early", "easy", "fast", "few", "fine", "fresh", "full", "great", "happy", "hard",
    "heavy", "high", "hot", "huge", "large", "light", "long", "loose", "low", "narrow", "near",
    "new", "nice", "old", "poor", "pure", "quick", "rare", "rich", "safe", "sharp", "short",
    "simple", "slow", "small", "smart", "soft", "strict", "strong", "thick", "thin", "tight",
    "tiny", "true", "warm", "weak", "wide", "wise", "young",
];

/// Stem endings after which a dropped `e` is restored, with whether the
/// ending must be preceded by a consonant.
const E_RESTORE: &[(&str, bool)] = &[
    ("v", false),
    ("iz", false),
    ("dg", false),
    ("rg", false),
    ("c", false),
    ("at", true),
    ("ut", true),
    ("id", true),
    ("ud", true),
    ("od", true),
    ("ib", true),
    ("in", true),
    ("ok", true),
    ("ap", true),
    ("um", true),
    ("ur", true),
    ("ir", true),
    ("ar", true),
    ("ang", false),
    ("eng", false),
    ("rs", false),
];

#[derive(Debug, thiserror::Error)]
pub enum LemmaTableError {
    #[error("reading lemma table {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("lemma table line {line}: expected `token<TAB>lemma`")]
    Malformed { line: usize },
}

/// Ordered lowercase tokens over `[a-z0-9]+`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenSequence(pub Vec<String>);

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

impl From<Vec<&str>> for TokenSequence {
    fn from(tokens: Vec<&str>) -> Self {
        TokenSequence(tokens.into_iter().map(str::to_string).collect())
    }
}

/// Rule-based English lemmatizer backed by an exception table.
#[derive(Debug, Clone)]
pub struct Lemmatizer {
    exceptions: HashMap<String, String>,
}

impl Default for Lemmatizer {
    fn default() -> Self {
        Self::from_table(BUNDLED_EXCEPTIONS).expect("bundled lemma table is well formed")
    }
}

impl Lemmatizer {
    /// Parse a `token<TAB>lemma` table. Blank lines and `#` comments are ignored.
    pub fn from_table(text: &str) -> Result<Self, LemmaTableError> {
        let mut exceptions = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (token, lemma) = line
                .split_once('\t')
                .ok_or(LemmaTableError::Malformed { line: i + 1 })?;
            let (token, lemma) = (token.trim(), lemma.trim());
            if token.is_empty() || lemma.is_empty() {
                return Err(LemmaTableError::Malformed { line: i + 1 });
            }
            exceptions.insert(token.to_ascii_lowercase(), lemma.to_ascii_lowercase());
        }
        Ok(Self { exceptions })
    }

    pub fn from_file(path: &Path) -> Result<Self, LemmaTableError> {
        let text = std::fs::read_to_string(path).map_err(|source| LemmaTableError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_table(&text)
    }

    pub fn exceptions(&self) -> impl Iterator<Item = (&str, &str)> {
        self.exceptions.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Reduce `token` to its lemma. Tokens that are not purely lowercase
    /// alphabetic pass through unchanged.
    pub fn lemmatize(&self, token: &str) -> String {
        let mut current = token.to_string();
        // Every rule step strictly shortens the token and exception targets
        // are fixpoints, so this terminates.
        while let Some(next) = self.step(&current) {
            if next == current {
                break;
            }
            current = next;
        }
        current
    }

    fn step(&self, t: &str) -> Option<String> {
        if t.is_empty() || !t.bytes().all(|b| b.is_ascii_lowercase()) {
            return None;
        }
        if let Some(lemma) = self.exceptions.get(t) {
            return Some(lemma.clone());
        }
        if t == ISSUE_TOKEN || t == URL_TOKEN {
            return None;
        }
        let n = t.len();
        for suffix in ["est", "er"] {
            if let Some(stem) = t.strip_suffix(suffix) {
                if let Some(adj) = comparative_base(stem) {
                    return Some(adj);
                }
            }
        }
        if n > 4 && t.ends_with("ies") {
            return Some(format!("{}y", &t[..n - 3]));
        }
        if t.ends_with("sses") || t.ends_with("xes") || t.ends_with("ches") || t.ends_with("shes") || t.ends_with("zzes") {
            return Some(t[..n - 2].to_string());
        }
        if t.ends_with('s') {
            if n <= 3 || t.ends_with("ss") || t.ends_with("us") || t.ends_with("is") {
                return None;
            }
            return Some(t[..n - 1].to_string());
        }
        if n > 4 && t.ends_with("ed") && !t.ends_with("eed") {
            if t.ends_with("ied") {
                return Some(format!("{}y", &t[..n - 3]));
            }
            return restore_stem(&t[..n - 2]);
        }
        if n > 5 && t.ends_with("ing") {
            return restore_stem(&t[..n - 3]);
        }
        None
    }
}

fn is_vowel(b: u8) -> bool {
    matches!(b, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn comparative_base(stem: &str) -> Option<String> {
    let mut candidates = vec![stem.to_string(), format!("{stem}e")];
    if let Some(s) = stem.strip_suffix('i') {
        candidates.push(format!("{s}y"));
    }
    let b = stem.as_bytes();
    if b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] {
        candidates.push(stem[..stem.len() - 1].to_string());
    }
    candidates
        .into_iter()
        .find(|c| COMPARABLE.contains(&c.as_str()))
}

/// Clean up a stem left behind by `-ed`/`-ing` removal.
fn restore_stem(stem: &str) -> Option<String> {
    let b = stem.as_bytes();
    let n = b.len();
    if n < 2 || !b.iter().any(|&c| is_vowel(c) || c == b'y') {
        return None;
    }
    let last = b[n - 1];
    if n >= 3 && last == b[n - 2] && !is_vowel(last) && !matches!(last, b'l' | b's' | b'z' | b'f') {
        return Some(stem[..n - 1].to_string());
    }
    if needs_e(b) {
        return Some(format!("{stem}e"));
    }
    Some(stem.to_string())
}

fn needs_e(b: &[u8]) -> bool {
    let n = b.len();
    // consonant + l, e.g. handl(e), enabl(e)
    if n >= 3 && b[n - 1] == b'l' && matches!(b[n - 2], b'b' | b'c' | b'd' | b'f' | b'g' | b'k' | b'p' | b't' | b'z') {
        return true;
    }
    // vowel or r + s, e.g. clos(e), rais(e), pars(e)
    if n >= 3 && b[n - 1] == b's' && (is_vowel(b[n - 2]) || b[n - 2] == b'r') && b[n - 2] != b'u' {
        return true;
    }
    for &(ending, consonant_before) in E_RESTORE {
        let e = ending.as_bytes();
        if n > e.len() && b.ends_with(e) && (!consonant_before || !is_vowel(b[n - e.len() - 1])) {
            return true;
        }
    }
    // A single vowel group closed by one consonant: mak(e), tim(e), writ(e).
    let groups = vowel_groups(b);
    n >= 3
        && groups == 1
        && !is_vowel(b[n - 1])
        && !matches!(b[n - 1], b'w' | b'x' | b'y')
        && is_vowel(b[n - 2])
        && !is_vowel(b[n - 3])
}

fn vowel_groups(b: &[u8]) -> usize {
    let mut groups = 0;
    let mut prev = false;
    for &c in b {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    groups
}

/// Replace every run of characters outside `[A-Za-z0-9]` with one space and
/// trim the ends.
pub fn clean(text: &str) -> String {
    SPECIAL.replace_all(text, " ").trim().to_string()
}

/// Full normalization of a comment: abstraction, lowercase, clean,
/// whitespace tokenization, lemmatization.
pub fn preprocess(comment: &str, patterns: &PatternSet, lemmatizer: &Lemmatizer) -> TokenSequence {
    preprocess_all(comment, std::slice::from_ref(patterns), lemmatizer)
}

/// [`preprocess`] with issue abstraction drawn from several projects.
pub fn preprocess_all(comment: &str, patterns: &[PatternSet], lemmatizer: &Lemmatizer) -> TokenSequence {
    let abstracted = abstract_terms_all(patterns, comment);
    let lowered = abstracted.to_ascii_lowercase();
    let cleaned = clean(&lowered);
    TokenSequence(
        cleaned
            .split_whitespace()
            .map(|tok| lemmatizer.lemmatize(tok))
            .collect(),
    )
}
