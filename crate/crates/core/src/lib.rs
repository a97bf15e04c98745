//! Detection of On-hold self-admitted technical debt: comments that wait on
//! an issue-tracker ticket before some work can be finished.
//!
//! The crate mines Java comments from git history, finds issue references,
//! turns comments into n-gram features, classifies them, checks the
//! referenced issues, and carries the evaluation statistics used to judge
//! the classifier.

pub mod config;
pub mod dataset;
pub mod features;
pub mod its;
pub mod learner;
pub mod linker;
pub mod miner;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod synthetic;
pub mod text;

pub use dataset::DatasetRow;
pub use features::{ExtractionConfig, FeatureVector, NGramTerm, NGramVocabulary};
pub use its::{Gateway, IssueRecord, ItsError, OnHoldComment, Recommendation};
pub use learner::{Dataset, Label, ModelSpec, TrainedModel};
pub use linker::{IssueReference, PatternSet, TrackerKind};
pub use miner::{mine_repository, CommentBlock, CommentLifecycle};
pub use pipeline::{Classifier, Evaluation, ProjectSpec, Variant};
pub use stats::{FoldScores, Metrics};
pub use text::{Lemmatizer, TokenSequence};
