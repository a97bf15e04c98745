//! Classifiers over sparse binary feature vectors.
//!
//! Every model trains on a canonical row order (sorted by row content), so
//! shuffling the training rows never changes predictions. All randomness
//! comes from ChaCha streams derived from the caller's seed.

mod bayes;
mod knn;
mod select;
mod smote;
mod svm;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use bayes::BernoulliNb;
pub use knn::{jaccard_distance, Knn};
pub use select::{default_grid, select_model, CandidateScore, Selection};
pub use smote::{interpolate, smote_dense, smote_oversample, smote_oversample_traced, SyntheticRow};
pub use svm::LinearSvm;
pub use tree::{Forest, Tree};

use crate::features::FeatureVector;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    OnHold,
    CrossReference,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::OnHold
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::OnHold => "OnHold",
            Label::CrossReference => "CrossReference",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = LearnError;

    /// Case-insensitive; `-`, `_` and spaces are ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "onhold" | "onholdsatd" | "1" | "positive" => Ok(Label::OnHold),
            "crossreference" | "crossref" | "0" | "negative" => Ok(Label::CrossReference),
            _ => Err(LearnError::UnknownLabel(s.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LearnError {
    #[error("training data needs both classes")]
    SingleClass,
    #[error("training data is empty")]
    Empty,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("SMOTE needs at least 2 minority rows, got {0}")]
    MinorityTooSmall(usize),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("feature index {index} out of range for dimension {dim}")]
    FeatureOutOfRange { index: u32, dim: usize },
    #[error("empty candidate grid")]
    EmptyGrid,
}

/// Labeled feature vectors over a fixed feature dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<(FeatureVector, Label)>,
    pub dim: usize,
    pub provenance: String,
}

impl Dataset {
    pub fn new(rows: Vec<(FeatureVector, Label)>, dim: usize, provenance: impl Into<String>) -> Result<Self, LearnError> {
        for (v, _) in &rows {
            if let Some(&index) = v.indices().iter().find(|&&i| i as usize >= dim) {
                return Err(LearnError::FeatureOutOfRange { index, dim });
            }
        }
        Ok(Self {
            rows,
            dim,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.rows.iter().filter(|(_, l)| *l == label).count()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|(_, l)| *l).collect()
    }

    pub fn subset(&self, indices: &[usize], provenance: impl Into<String>) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            dim: self.dim,
            provenance: provenance.into(),
        }
    }

    fn check_trainable(&self) -> Result<(), LearnError> {
        if self.rows.is_empty() {
            return Err(LearnError::Empty);
        }
        if self.count(Label::OnHold) == 0 || self.count(Label::CrossReference) == 0 {
            return Err(LearnError::SingleClass);
        }
        Ok(())
    }

    /// Rows sorted by content, the order every learner trains on.
    fn canonical_rows(&self) -> Vec<(FeatureVector, Label)> {
        let mut rows = self.rows.clone();
        rows.sort();
        rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    ExtraTrees,
    RandomForest,
    NaiveBayes,
    LinearSvm,
    Knn,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::ExtraTrees => "ExtraTrees",
            Algorithm::RandomForest => "RandomForest",
            Algorithm::NaiveBayes => "NaiveBayes",
            Algorithm::LinearSvm => "LinearSVM",
            Algorithm::Knn => "KNN",
        }
    }
}

/// An algorithm together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm")]
pub enum ModelSpec {
    ExtraTrees { trees: usize, max_depth: Option<usize> },
    RandomForest { trees: usize, max_depth: Option<usize> },
    NaiveBayes { alpha: f64 },
    LinearSvm { lambda: f64, epochs: usize },
    Knn { k: usize },
}

impl ModelSpec {
    pub fn extra_trees() -> Self {
        ModelSpec::ExtraTrees { trees: 100, max_depth: None }
    }

    pub fn random_forest() -> Self {
        ModelSpec::RandomForest { trees: 100, max_depth: None }
    }

    pub fn naive_bayes() -> Self {
        ModelSpec::NaiveBayes { alpha: 1.0 }
    }

    pub fn linear_svm() -> Self {
        ModelSpec::LinearSvm { lambda: 1e-4, epochs: 20 }
    }

    pub fn knn() -> Self {
        ModelSpec::Knn { k: 5 }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            ModelSpec::ExtraTrees { .. } => Algorithm::ExtraTrees,
            ModelSpec::RandomForest { .. } => Algorithm::RandomForest,
            ModelSpec::NaiveBayes { .. } => Algorithm::NaiveBayes,
            ModelSpec::LinearSvm { .. } => Algorithm::LinearSvm,
            ModelSpec::Knn { .. } => Algorithm::Knn,
        }
    }

    pub fn hyperparameters(&self) -> BTreeMap<&'static str, String> {
        let depth = |d: &Option<usize>| d.map_or_else(|| "inf".to_string(), |d| d.to_string());
        let mut map = BTreeMap::new();
        match self {
            ModelSpec::ExtraTrees { trees, max_depth } | ModelSpec::RandomForest { trees, max_depth } => {
                map.insert("trees", trees.to_string());
                map.insert("max_depth", depth(max_depth));
            }
            ModelSpec::NaiveBayes { alpha } => {
                map.insert("alpha", alpha.to_string());
            }
            ModelSpec::LinearSvm { lambda, epochs } => {
                map.insert("lambda", lambda.to_string());
                map.insert("epochs", epochs.to_string());
            }
            ModelSpec::Knn { k } => {
                map.insert("k", k.to_string());
            }
        }
        map
    }

    fn validate(&self) -> Result<(), LearnError> {
        let bad = |msg: &str| Err(LearnError::InvalidHyperparameter(msg.to_string()));
        match *self {
            ModelSpec::ExtraTrees { trees, max_depth } | ModelSpec::RandomForest { trees, max_depth } => {
                if trees == 0 {
                    return bad("trees must be positive");
                }
                if max_depth == Some(0) {
                    return bad("max_depth must be positive");
                }
            }
            ModelSpec::NaiveBayes { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                return bad("alpha must be positive");
            }
            ModelSpec::LinearSvm { lambda, epochs } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return bad("lambda must be positive");
                }
                if epochs == 0 {
                    return bad("epochs must be positive");
                }
            }
            ModelSpec::Knn { k: 0 } => return bad("k must be positive"),
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self
            .hyperparameters()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        write!(f, "{}({})", self.algorithm().as_str(), params.join(","))
    }
}

impl FromStr for ModelSpec {
    type Err = LearnError;

    /// Short names: `et`, `rf`, `nb`, `svm`, `knn`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "et" | "extratrees" => Ok(Self::extra_trees()),
            "rf" | "randomforest" => Ok(Self::random_forest()),
            "nb" | "naivebayes" => Ok(Self::naive_bayes()),
            "svm" | "linearsvm" => Ok(Self::linear_svm()),
            "knn" => Ok(Self::knn()),
            other => Err(LearnError::UnknownAlgorithm(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FittedModel {
    Forest(Forest),
    NaiveBayes(BernoulliNb),
    LinearSvm(LinearSvm),
    Knn(Knn),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub decision_threshold: f64,
    pub seed: u64,
    pub dim: usize,
    pub fitted: FittedModel,
}

impl TrainedModel {
    /// Score in [0, 1]; higher means more likely OnHold.
    pub fn predict_proba(&self, vector: &FeatureVector) -> f64 {
        let p = match &self.fitted {
            FittedModel::Forest(f) => f.predict_proba(vector),
            FittedModel::NaiveBayes(nb) => nb.predict_proba(vector),
            FittedModel::LinearSvm(svm) => svm.predict_proba(vector),
            FittedModel::Knn(knn) => knn.predict_proba(vector),
        };
        p.clamp(0.0, 1.0)
    }

    /// OnHold iff the score reaches the decision threshold.
    pub fn classify(&self, vector: &FeatureVector) -> Label {
        label_for(self.predict_proba(vector), self.decision_threshold)
    }
}

pub fn label_for(score: f64, threshold: f64) -> Label {
    if score >= threshold {
        Label::OnHold
    } else {
        Label::CrossReference
    }
}

/// Derive an independent seed for a sub-task.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream))
}

pub fn train(dataset: &Dataset, spec: ModelSpec, seed: u64) -> Result<TrainedModel, LearnError> {
    spec.validate()?;
    dataset.check_trainable()?;
    let rows = dataset.canonical_rows();
    let fitted = match spec {
        ModelSpec::ExtraTrees { trees, max_depth } => {
            FittedModel::Forest(Forest::fit(&rows, dataset.dim, trees, max_depth, false, seed))
        }
        ModelSpec::RandomForest { trees, max_depth } => {
            FittedModel::Forest(Forest::fit(&rows, dataset.dim, trees, max_depth, true, seed))
        }
        ModelSpec::NaiveBayes { alpha } => FittedModel::NaiveBayes(BernoulliNb::fit(&rows, dataset.dim, alpha)),
        ModelSpec::LinearSvm { lambda, epochs } => {
            FittedModel::LinearSvm(LinearSvm::fit(&rows, dataset.dim, lambda, epochs, seed))
        }
        ModelSpec::Knn { k } => FittedModel::Knn(Knn::fit(rows, k)),
    };
    Ok(TrainedModel {
        spec,
        decision_threshold: DEFAULT_THRESHOLD,
        seed,
        dim: dataset.dim,
        fitted,
    })
}
