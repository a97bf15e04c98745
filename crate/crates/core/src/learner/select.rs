use serde::{Deserialize, Serialize};

use super::{derive_seed, train, Dataset, LearnError, ModelSpec, TrainedModel};
use crate::stats::{compute_auc, compute_metrics, stratified_kfold_split};

/// The candidate grid searched by [`select_model`].
pub fn default_grid() -> Vec<ModelSpec> {
    vec![
        ModelSpec::ExtraTrees { trees: 100, max_depth: None },
        ModelSpec::ExtraTrees { trees: 100, max_depth: Some(10) },
        ModelSpec::RandomForest { trees: 100, max_depth: None },
        ModelSpec::RandomForest { trees: 100, max_depth: Some(10) },
        ModelSpec::NaiveBayes { alpha: 1.0 },
        ModelSpec::LinearSvm { lambda: 1e-2, epochs: 20 },
        ModelSpec::LinearSvm { lambda: 1e-4, epochs: 20 },
        ModelSpec::Knn { k: 1 },
        ModelSpec::Knn { k: 5 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub spec: ModelSpec,
    pub mean_f1: f64,
    pub mean_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// The winner, refit on the whole training fold.
    pub model: TrainedModel,
    /// Inner cross-validation scores in grid order.
    pub scores: Vec<CandidateScore>,
}

fn inner_scores(train_fold: &Dataset, spec: ModelSpec, folds: &[Vec<usize>], seed: u64) -> CandidateScore {
    let (mut f1, mut auc) = (0.0, 0.0);
    for (i, held_out) in folds.iter().enumerate() {
        let fit_idx: Vec<usize> = (0..train_fold.len()).filter(|r| held_out.binary_search(r).is_err()).collect();
        let fit = train_fold.subset(&fit_idx, "inner-train");
        let eval = train_fold.subset(held_out, "inner-eval");
        // A fold that cannot be trained on contributes nothing.
        let Ok(model) = train(&fit, spec, derive_seed(seed, i as u64)) else {
            auc += 0.5;
            continue;
        };
        let truth = eval.labels();
        let scores: Vec<f64> = eval.rows.iter().map(|(v, _)| model.predict_proba(v)).collect();
        let predicted: Vec<_> = eval.rows.iter().map(|(v, _)| model.classify(v)).collect();
        f1 += compute_metrics(&predicted, &truth).map_or(0.0, |m| m.f1);
        auc += compute_auc(&scores, &truth).unwrap_or(0.5);
    }
    let n = folds.len() as f64;
    CandidateScore {
        spec,
        mean_f1: f1 / n,
        mean_auc: auc / n,
    }
}

/// Pick the candidate with the best inner cross-validated mean F1 (ties:
/// higher AUC, then earlier in the grid) and refit it on `train_fold`.
///
/// Only `train_fold` is visible here, so held-out outer rows cannot leak in.
pub fn select_model(train_fold: &Dataset, grid: &[ModelSpec], inner_k: usize, seed: u64) -> Result<Selection, LearnError> {
    let Some(&first) = grid.first() else {
        return Err(LearnError::EmptyGrid);
    };
    let refit_seed = derive_seed(seed, u64::MAX);
    if grid.len() == 1 {
        let model = train(train_fold, first, refit_seed)?;
        return Ok(Selection { model, scores: Vec::new() });
    }
    let folds = stratified_kfold_split(&train_fold.labels(), inner_k, derive_seed(seed, 0x1a1a))
        .map_err(|e| LearnError::InvalidHyperparameter(e.to_string()))?;
    let scores: Vec<CandidateScore> = grid
        .iter()
        .map(|&spec| inner_scores(train_fold, spec, &folds, seed))
        .collect();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        let b = &scores[best];
        if s.mean_f1 > b.mean_f1 || (s.mean_f1 == b.mean_f1 && s.mean_auc > b.mean_auc) {
            best = i;
        }
    }
    let model = train(train_fold, scores[best].spec, refit_seed)?;
    Ok(Selection { model, scores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use crate::learner::{Algorithm, Label};

    fn separable() -> Dataset {
        let mut rows = Vec::new();
        for i in 0..9u32 {
            rows.push((FeatureVector::from_indices([0, 2 + i % 3]), Label::OnHold));
            rows.push((FeatureVector::from_indices([1, 5 + i % 3]), Label::CrossReference));
        }
        Dataset::new(rows, 8, "sep").unwrap()
    }

    #[test]
    fn singleton_grid() {
        let sel = select_model(&separable(), &[ModelSpec::extra_trees()], 3, 1).unwrap();
        assert_eq!(sel.model.spec.algorithm(), Algorithm::ExtraTrees);
    }

    #[test]
    fn ties_go_to_grid_order() {
        let grid = [ModelSpec::Knn { k: 1 }, ModelSpec::Knn { k: 5 }];
        let sel = select_model(&separable(), &grid, 3, 1).unwrap();
        assert!(sel.scores.iter().all(|s| s.mean_f1 == 1.0 && s.mean_auc == 1.0));
        assert_eq!(sel.model.spec, ModelSpec::Knn { k: 1 });
    }

    #[test]
    fn empty_grid_is_an_error() {
        assert_eq!(select_model(&separable(), &[], 3, 1).unwrap_err(), LearnError::EmptyGrid);
    }
}
