use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{rng_for, Label};
use crate::features::FeatureVector;

/// Linear SVM (hinge loss, L2 penalty) trained with Pegasos sub-gradient
/// steps. The bias is a weight on a constant extra feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    weights: Vec<f64>,
    bias: f64,
}

impl LinearSvm {
    pub(super) fn fit(rows: &[(FeatureVector, Label)], dim: usize, lambda: f64, epochs: usize, seed: u64) -> Self {
        // `w` is stored as scale * v so the shrink step is O(1).
        let mut v = vec![0.0f64; dim + 1];
        let mut scale = 1.0f64;
        let mut norm_sq = 0.0f64;
        let radius_sq = 1.0 / lambda;
        let mut order: Vec<usize> = (0..rows.len()).collect();
        let mut rng = rng_for(seed, 0x5356_4d00);
        let mut t = 0u64;
        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let (x, label) = &rows[i];
                let y = if label.is_positive() { 1.0 } else { -1.0 };
                let margin = scale * (x.indices().iter().map(|&f| v[f as usize]).sum::<f64>() + v[dim]);
                let shrink = 1.0 - eta * lambda;
                if shrink <= 0.0 {
                    // first step: w becomes zero before the update
                    v.fill(0.0);
                    scale = 1.0;
                    norm_sq = 0.0;
                } else {
                    scale *= shrink;
                    norm_sq *= shrink * shrink;
                }
                if y * margin < 1.0 {
                    let step = eta * y / scale;
                    for f in x.indices().iter().map(|&f| f as usize).chain([dim]) {
                        let before = v[f];
                        v[f] += step;
                        norm_sq += scale * scale * (v[f] * v[f] - before * before);
                    }
                }
                if norm_sq > radius_sq {
                    scale *= (radius_sq / norm_sq).sqrt();
                    norm_sq = radius_sq;
                }
                if scale < 1e-9 {
                    v.iter_mut().for_each(|w| *w *= scale);
                    scale = 1.0;
                }
            }
        }
        let mut weights: Vec<f64> = v.iter().map(|w| w * scale).collect();
        let bias = weights.pop().unwrap_or(0.0);
        Self { weights, bias }
    }

    pub fn margin(&self, vector: &FeatureVector) -> f64 {
        vector.indices().iter().map(|&f| self.weights[f as usize]).sum::<f64>() + self.bias
    }

    /// Logistic squash of the margin; 0.5 exactly on the hyperplane.
    pub fn predict_proba(&self, vector: &FeatureVector) -> f64 {
        1.0 / (1.0 + (-self.margin(vector)).exp())
    }
}
