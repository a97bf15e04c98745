//! End-to-end classifier fitting and cross-validated evaluation of feature
//! and learner variants.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{
    build_bow_vocabulary, extract_terms, vectorize, vectorize_bow, ExtractionConfig, FeatureError, FeatureVector,
    NGramVocabulary,
};
use crate::learner::{
    default_grid, derive_seed, select_model, smote_oversample, train, CandidateScore, Dataset, Label, LearnError,
    ModelSpec, TrainedModel,
};
use crate::linker::{PatternError, PatternSet, TrackerKind};
use crate::stats::{
    compare_variants, compute_auc, compute_metrics, stratified_kfold_split, ComparisonResult, FoldScores, Metrics,
    MetricName, StatsConfig, StatsError,
};
use crate::text::{preprocess_all, Lemmatizer, TokenSequence};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("unknown variant {0:?}; expected <ngram|bow>[-smote]-<auto|et|rf|nb|svm|knn>")]
    UnknownVariant(String),
    #[error("bad project {0:?}; expected tracker[:key], e.g. jira:HADOOP")]
    BadProject(String),
    #[error("no labeled comments")]
    Empty,
}

/// A tracker and project key, written `tracker[:key]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectSpec {
    pub tracker: TrackerKind,
    pub key: String,
}

impl FromStr for ProjectSpec {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (tracker, key) = s.split_once(':').unwrap_or((s, ""));
        let tracker = tracker
            .trim()
            .parse::<TrackerKind>()
            .map_err(|_| PipelineError::BadProject(s.to_string()))?;
        Ok(Self {
            tracker,
            key: key.trim().to_string(),
        })
    }
}

impl fmt::Display for ProjectSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.tracker)
        } else {
            write!(f, "{}:{}", self.tracker, self.key)
        }
    }
}

/// The trackers and keys of the ten studied projects, used to abstract
/// issue references in the released dataset.
pub const STUDY_PROJECTS: [&str; 10] = [
    "bugzilla:ant",
    "jira:CAMEL",
    "github",
    "jira:HADOOP",
    "bugzilla:jmeter",
    "jira:KAFKA",
    "bugzilla:log4j",
    "jira:LOG4J2",
    "bugzilla:tomcat",
    "github:mockito",
];

pub fn build_patterns(projects: &[ProjectSpec]) -> Result<Vec<PatternSet>, PipelineError> {
    Ok(projects
        .iter()
        .map(|p| PatternSet::build(p.tracker, &p.key))
        .collect::<Result<_, _>>()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    NGram,
    Bow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LearnerChoice {
    /// Inner cross-validated search over a candidate grid.
    Auto,
    Fixed(ModelSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    pub features: FeatureKind,
    pub smote: bool,
    pub learner: LearnerChoice,
}

impl FromStr for Variant {
    type Err = PipelineError;

    /// `<ngram|bow>[-smote]-<auto|et|rf|nb|svm|knn>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let name = s.trim().to_ascii_lowercase();
        let unknown = || PipelineError::UnknownVariant(s.to_string());
        let parts: Vec<&str> = name.split('-').collect();
        let (features, smote, learner) = match parts.as_slice() {
            [f, l] => (*f, false, *l),
            [f, "smote", l] => (*f, true, *l),
            _ => return Err(unknown()),
        };
        let features = match features {
            "ngram" => FeatureKind::NGram,
            "bow" => FeatureKind::Bow,
            _ => return Err(unknown()),
        };
        let learner = match learner {
            "auto" => LearnerChoice::Auto,
            other => LearnerChoice::Fixed(other.parse().map_err(|_| unknown())?),
        };
        Ok(Variant {
            name,
            features,
            smote,
            learner,
        })
    }
}

pub const DEFAULT_VARIANTS: [&str; 8] = [
    "ngram-auto",
    "bow-auto",
    "ngram-smote-auto",
    "ngram-et",
    "ngram-rf",
    "ngram-nb",
    "ngram-svm",
    "ngram-knn",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledComment {
    pub tokens: TokenSequence,
    pub label: Label,
}

/// Preprocess raw comments with issue abstraction from `patterns`.
pub fn prepare(
    comments: &[(String, Label)],
    patterns: &[PatternSet],
    lemmatizer: &Lemmatizer,
) -> Vec<LabeledComment> {
    comments
        .par_iter()
        .map(|(text, label)| LabeledComment {
            tokens: preprocess_all(text, patterns, lemmatizer),
            label: *label,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub k: usize,
    pub seed: u64,
    pub inner_k: usize,
    /// Extract the n-gram vocabulary once from every positive comment
    /// instead of per training fold. This leaks test-fold text into the
    /// features and exists only to measure that effect.
    pub global_vocab: bool,
    pub extraction: ExtractionConfig,
    pub grid: Vec<ModelSpec>,
    pub smote_k: usize,
    pub stats: StatsConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            k: 10,
            seed: crate::config::DEFAULT_SEED,
            inner_k: 3,
            global_vocab: false,
            extraction: ExtractionConfig::default(),
            grid: default_grid(),
            smote_k: 5,
            stats: StatsConfig::default(),
        }
    }
}

/// A fitted vocabulary and model, ready to score preprocessed comments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub variant: String,
    pub features: FeatureKind,
    pub vocabulary: NGramVocabulary,
    pub vocabulary_hash: String,
    pub model: TrainedModel,
    /// Inner cross-validation scores when the learner was searched.
    pub candidates: Vec<CandidateScore>,
}

fn vectorizer(kind: FeatureKind) -> fn(&TokenSequence, &NGramVocabulary) -> FeatureVector {
    match kind {
        FeatureKind::NGram => vectorize,
        FeatureKind::Bow => vectorize_bow,
    }
}

impl Classifier {
    /// Build the vocabulary from `train` (or use `fixed_vocab`), then fit
    /// the variant's learner on it.
    pub fn fit(
        train_rows: &[&LabeledComment],
        variant: &Variant,
        config: &EvalConfig,
        fixed_vocab: Option<&NGramVocabulary>,
        seed: u64,
        source: &str,
    ) -> Result<Self, PipelineError> {
        let vocabulary = match (fixed_vocab, variant.features) {
            (Some(v), _) => v.clone(),
            (None, FeatureKind::NGram) => {
                let positives: Vec<TokenSequence> = train_rows
                    .iter()
                    .filter(|c| c.label.is_positive())
                    .map(|c| c.tokens.clone())
                    .collect();
                extract_terms(&positives, config.extraction, source)?
            }
            (None, FeatureKind::Bow) => {
                let all: Vec<TokenSequence> = train_rows.iter().map(|c| c.tokens.clone()).collect();
                build_bow_vocabulary(&all, source)?
            }
        };
        let vec_of = vectorizer(variant.features);
        let rows = train_rows
            .iter()
            .map(|c| (vec_of(&c.tokens, &vocabulary), c.label))
            .collect();
        let mut data = Dataset::new(rows, vocabulary.len(), source)?;
        if variant.smote {
            data = smote_oversample(&data, config.smote_k, derive_seed(seed, 0x5307))?;
        }
        let (model, candidates) = match variant.learner {
            LearnerChoice::Fixed(spec) => (train(&data, spec, seed)?, Vec::new()),
            LearnerChoice::Auto => {
                let sel = select_model(&data, &config.grid, config.inner_k, seed)?;
                (sel.model, sel.scores)
            }
        };
        Ok(Self {
            variant: variant.name.clone(),
            features: variant.features,
            vocabulary_hash: vocabulary.content_hash(),
            vocabulary,
            model,
            candidates,
        })
    }

    pub fn vectorize(&self, tokens: &TokenSequence) -> FeatureVector {
        vectorizer(self.features)(tokens, &self.vocabulary)
    }

    pub fn score(&self, tokens: &TokenSequence) -> f64 {
        self.model.predict_proba(&self.vectorize(tokens))
    }

    pub fn classify(&self, tokens: &TokenSequence) -> Label {
        self.model.classify(&self.vectorize(tokens))
    }

    /// Restore lookup tables after deserialization.
    pub fn rebuild(mut self) -> Self {
        self.vocabulary = self.vocabulary.rebuild_index();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub variant: String,
    pub fold: usize,
    pub metrics: Metrics,
    pub auc: f64,
    pub model: String,
    pub vocabulary_size: usize,
    pub train_size: usize,
    pub test_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub on_hold: usize,
    pub cross_reference: usize,
    pub folds: Vec<FoldOutcome>,
    /// Per-variant fold scores, in the order variants were given.
    pub scores: Vec<(String, FoldScores)>,
    pub comparisons: Vec<ComparisonResult>,
}

impl Evaluation {
    pub fn mean(&self, variant: &str, metric: MetricName) -> Option<f64> {
        self.scores.iter().find(|(v, _)| v == variant).map(|(_, s)| s.mean(metric))
    }
}

/// Stratified k-fold cross-validation of every variant on the same folds.
/// Vocabularies and models only ever see the training part of each fold.
pub fn evaluate(comments: &[LabeledComment], variants: &[Variant], config: &EvalConfig) -> Result<Evaluation, PipelineError> {
    if comments.is_empty() {
        return Err(PipelineError::Empty);
    }
    let labels: Vec<Label> = comments.iter().map(|c| c.label).collect();
    let folds = stratified_kfold_split(&labels, config.k, derive_seed(config.seed, 1))?;
    let global = if config.global_vocab {
        let positives: Vec<TokenSequence> = comments
            .iter()
            .filter(|c| c.label.is_positive())
            .map(|c| c.tokens.clone())
            .collect();
        Some(extract_terms(&positives, config.extraction, "global")?)
    } else {
        None
    };

    let tasks: Vec<(usize, usize)> = (0..variants.len())
        .flat_map(|v| (0..folds.len()).map(move |f| (v, f)))
        .collect();
    let outcomes: Vec<FoldOutcome> = tasks
        .par_iter()
        .map(|&(v, f)| -> Result<FoldOutcome, PipelineError> {
            let variant = &variants[v];
            let test = &folds[f];
            let train_rows: Vec<&LabeledComment> = (0..comments.len())
                .filter(|i| test.binary_search(i).is_err())
                .map(|i| &comments[i])
                .collect();
            let fixed = match variant.features {
                FeatureKind::NGram => global.as_ref(),
                FeatureKind::Bow => None,
            };
            let seed = derive_seed(config.seed, 100 + f as u64);
            let clf = Classifier::fit(&train_rows, variant, config, fixed, seed, &format!("fold-{f}"))?;
            let truth: Vec<Label> = test.iter().map(|&i| comments[i].label).collect();
            let scores: Vec<f64> = test.iter().map(|&i| clf.score(&comments[i].tokens)).collect();
            let predicted: Vec<Label> = test.iter().map(|&i| clf.classify(&comments[i].tokens)).collect();
            Ok(FoldOutcome {
                variant: variant.name.clone(),
                fold: f,
                metrics: compute_metrics(&predicted, &truth)?,
                auc: compute_auc(&scores, &truth)?,
                model: clf.model.spec.to_string(),
                vocabulary_size: clf.vocabulary.len(),
                train_size: train_rows.len(),
                test_size: test.len(),
            })
        })
        .collect::<Result<_, _>>()?;

    let scores: Vec<(String, FoldScores)> = variants
        .iter()
        .map(|v| {
            let mut s = FoldScores::default();
            for o in outcomes.iter().filter(|o| o.variant == v.name) {
                s.push(&o.metrics, o.auc);
            }
            (v.name.clone(), s)
        })
        .collect();
    let comparisons = compare_variants(&scores, &config.stats)?;
    Ok(Evaluation {
        on_hold: labels.iter().filter(|l| l.is_positive()).count(),
        cross_reference: labels.iter().filter(|l| !l.is_positive()).count(),
        folds: outcomes,
        scores,
        comparisons,
    })
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

/// One row per (variant, fold).
pub fn render_results_tsv(eval: &Evaluation) -> String {
    let mut out = String::from("variant\tfold\tprecision\trecall\tf1\tauc\tmodel\tvocabulary_size\n");
    for o in &eval.folds {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            o.variant,
            o.fold + 1,
            f6(o.metrics.precision),
            f6(o.metrics.recall),
            f6(o.metrics.f1),
            f6(o.auc),
            o.model,
            o.vocabulary_size
        );
    }
    out
}

/// Mean of each metric per variant.
pub fn render_summary_tsv(eval: &Evaluation) -> String {
    let mut out = String::from("variant\tprecision\trecall\tf1\tauc\n");
    for (name, s) in &eval.scores {
        let means: Vec<String> = MetricName::ALL.iter().map(|&m| f6(s.mean(m))).collect();
        let _ = writeln!(out, "{name}\t{}", means.join("\t"));
    }
    out
}

pub fn render_comparisons_tsv(eval: &Evaluation) -> String {
    let mut out = String::from("first\tsecond\tmetric\tp_value\tadjusted_p_value\tcliffs_delta\tmagnitude\tsignificant\n");
    for c in &eval.comparisons {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            c.first,
            c.second,
            c.metric.as_str(),
            f6(c.p_value),
            f6(c.adjusted_p_value),
            f6(c.cliffs_delta),
            c.magnitude.as_str(),
            c.significant
        );
    }
    out
}
