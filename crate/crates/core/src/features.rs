//! N-gram IDF term extraction and binary feature vectors.
//!
//! Terms are contiguous token n-grams mined from positive-class comments.
//! A unigram gets the ordinary IDF `ln(N/df) + 1`. A longer n-gram `g` is
//! weighted against the bisection `(s1, s2)` of `g` whose halves are most
//! frequent:
//!
//! ```text
//! w(g) = max(0, ln(N * df(g) / (df(s1) * df(s2))))
//! ```
//!
//! so an n-gram that co-occurs no more often than its two halves would by
//! chance gets weight zero and is dropped.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::text::TokenSequence;

pub const DEFAULT_MAX_N: usize = 10;
pub const DEFAULT_MIN_DF: usize = 2;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FeatureError {
    #[error("no positive training comments; the fold cannot be used")]
    EmptyCorpus,
    #[error("term {0:?} does not occur in the corpus")]
    UnknownTerm(String),
    #[error("vocabulary TSV line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub max_n: usize,
    pub min_df: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            max_n: DEFAULT_MAX_N,
            min_df: DEFAULT_MIN_DF,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NGramTerm {
    pub tokens: Vec<String>,
    pub doc_freq: usize,
    pub weight: f64,
}

impl NGramTerm {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Document frequencies of every n-gram up to `max_n` tokens.
#[derive(Debug, Clone)]
pub struct CorpusStats {
    pub documents: usize,
    pub doc_freq: HashMap<Vec<String>, usize>,
}

impl CorpusStats {
    pub fn collect(docs: &[TokenSequence], max_n: usize) -> Self {
        let mut doc_freq: HashMap<Vec<String>, usize> = HashMap::new();
        for doc in docs {
            let mut seen: HashSet<&[String]> = HashSet::new();
            let toks = doc.tokens();
            for n in 1..=max_n.min(toks.len()) {
                for window in toks.windows(n) {
                    seen.insert(window);
                }
            }
            for gram in seen {
                *doc_freq.entry(gram.to_vec()).or_insert(0) += 1;
            }
        }
        Self {
            documents: docs.len(),
            doc_freq,
        }
    }

    pub fn df(&self, gram: &[String]) -> usize {
        self.doc_freq.get(gram).copied().unwrap_or(0)
    }
}

/// N-gram IDF weight of `gram` under `stats`.
pub fn weight_term(gram: &[String], stats: &CorpusStats) -> Result<f64, FeatureError> {
    let df = stats.df(gram);
    if df == 0 || gram.is_empty() {
        return Err(FeatureError::UnknownTerm(gram.join(" ")));
    }
    let n_docs = stats.documents as f64;
    if gram.len() == 1 {
        return Ok((n_docs / df as f64).ln() + 1.0);
    }
    let denom = (1..gram.len())
        .map(|cut| stats.df(&gram[..cut]) as f64 * stats.df(&gram[cut..]) as f64)
        .fold(0.0_f64, f64::max);
    Ok((n_docs * df as f64 / denom).ln().max(0.0))
}

/// Ordered, deduplicated term list with a lookup index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NGramVocabulary {
    terms: Vec<NGramTerm>,
    source: String,
    #[serde(skip)]
    index: HashMap<Vec<String>, usize>,
    #[serde(skip)]
    longest: usize,
}

impl PartialEq for NGramVocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.source == other.source
    }
}

impl NGramVocabulary {
    /// Sorts by weight descending, then by term text.
    pub fn new(mut terms: Vec<NGramTerm>, source: impl Into<String>) -> Self {
        terms.sort_by(|a, b| {
            b.weight
                .total_cmp(&a.weight)
                .then_with(|| a.tokens.cmp(&b.tokens))
        });
        terms.dedup_by(|a, b| a.tokens == b.tokens);
        let mut vocab = Self {
            terms,
            source: source.into(),
            index: HashMap::new(),
            longest: 0,
        };
        vocab.reindex();
        vocab
    }

    fn reindex(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.tokens.clone(), i))
            .collect();
        self.longest = self.terms.iter().map(|t| t.tokens.len()).max().unwrap_or(0);
    }

    /// Call after deserializing; the lookup index is not serialized.
    pub fn rebuild_index(mut self) -> Self {
        self.reindex();
        self
    }

    pub fn terms(&self) -> &[NGramTerm] {
        &self.terms
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, gram: &[String]) -> Option<usize> {
        self.index.get(gram).copied()
    }

    /// `term TAB df TAB weight`, one line per term, no header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            let _ = writeln!(out, "{}\t{}\t{}", t.text(), t.doc_freq, t.weight);
        }
        out
    }

    pub fn from_tsv(text: &str, source: impl Into<String>) -> Result<Self, FeatureError> {
        let mut terms = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parse = |message: &str| FeatureError::Parse {
                line: i + 1,
                message: message.to_string(),
            };
            let mut cols = line.split('\t');
            let (Some(term), Some(df), Some(weight), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
                return Err(parse("expected 3 tab-separated columns"));
            };
            let tokens: Vec<String> = term.split(' ').map(str::to_string).collect();
            if tokens.iter().any(String::is_empty) {
                return Err(parse("empty token"));
            }
            terms.push(NGramTerm {
                tokens,
                doc_freq: df.parse().map_err(|_| parse("bad doc_freq"))?,
                weight: weight.parse().map_err(|_| parse("bad weight"))?,
            });
        }
        Ok(Self::new(terms, source))
    }

    /// Hex SHA-256 of the TSV form.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_tsv().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Mine weighted n-gram terms from positive-class comments.
///
/// Keeps n-grams of at most `config.max_n` tokens that occur in at least
/// `config.min_df` comments and have a positive weight.
pub fn extract_terms(
    positives: &[TokenSequence],
    config: ExtractionConfig,
    source: impl Into<String>,
) -> Result<NGramVocabulary, FeatureError> {
    if positives.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let stats = CorpusStats::collect(positives, config.max_n);
    let mut terms = Vec::new();
    for (gram, &df) in &stats.doc_freq {
        if df < config.min_df.max(1) {
            continue;
        }
        let weight = weight_term(gram, &stats)?;
        if weight > 0.0 {
            terms.push(NGramTerm {
                tokens: gram.clone(),
                doc_freq: df,
                weight,
            });
        }
    }
    Ok(NGramVocabulary::new(terms, source))
}

/// Unigram vocabulary over all training comments, for the bag-of-words
/// baseline.
pub fn build_bow_vocabulary(
    comments: &[TokenSequence],
    source: impl Into<String>,
) -> Result<NGramVocabulary, FeatureError> {
    extract_terms(comments, ExtractionConfig { max_n: 1, min_df: 1 }, source)
}

/// Sorted set of vocabulary indices for terms that occur contiguously in
/// `comment`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureVector(Vec<u32>);

impl FeatureVector {
    pub fn from_indices(indices: impl IntoIterator<Item = u32>) -> Self {
        let set: BTreeSet<u32> = indices.into_iter().collect();
        FeatureVector(set.into_iter().collect())
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn contains(&self, index: u32) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn vectorize(comment: &TokenSequence, vocab: &NGramVocabulary) -> FeatureVector {
    let toks = comment.tokens();
    let mut hits = Vec::new();
    for n in 1..=vocab.longest.min(toks.len()) {
        for window in toks.windows(n) {
            if let Some(i) = vocab.index_of(window) {
                hits.push(i as u32);
            }
        }
    }
    FeatureVector::from_indices(hits)
}

/// Binary unigram occurrence.
pub fn vectorize_bow(comment: &TokenSequence, bow_vocab: &NGramVocabulary) -> FeatureVector {
    FeatureVector::from_indices(
        comment
            .tokens()
            .iter()
            .filter_map(|t| bow_vocab.index_of(std::slice::from_ref(t)))
            .map(|i| i as u32),
    )
}
