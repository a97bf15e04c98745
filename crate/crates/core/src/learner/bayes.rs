use serde::{Deserialize, Serialize};

use super::Label;
use crate::features::FeatureVector;

/// Bernoulli naive Bayes with additive smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliNb {
    /// Per class (OnHold, CrossReference): log prior + sum of log(1 - theta).
    base: [f64; 2],
    /// Per class and feature: log(theta) - log(1 - theta).
    present_delta: [Vec<f64>; 2],
}

fn class_slot(label: Label) -> usize {
    match label {
        Label::OnHold => 0,
        Label::CrossReference => 1,
    }
}

impl BernoulliNb {
    pub(super) fn fit(rows: &[(FeatureVector, Label)], dim: usize, alpha: f64) -> Self {
        let mut class_rows = [0usize; 2];
        let mut feature_rows = [vec![0usize; dim], vec![0usize; dim]];
        for (v, label) in rows {
            let c = class_slot(*label);
            class_rows[c] += 1;
            for &f in v.indices() {
                feature_rows[c][f as usize] += 1;
            }
        }
        let n = rows.len() as f64;
        let mut base = [0.0; 2];
        let mut present_delta = [vec![0.0; dim], vec![0.0; dim]];
        for c in 0..2 {
            let denom = class_rows[c] as f64 + 2.0 * alpha;
            base[c] = (class_rows[c] as f64 / n).ln();
            for f in 0..dim {
                let theta = (feature_rows[c][f] as f64 + alpha) / denom;
                base[c] += (1.0 - theta).ln();
                present_delta[c][f] = theta.ln() - (1.0 - theta).ln();
            }
        }
        Self { base, present_delta }
    }

    /// Log joint likelihood of `vector` under each class.
    pub fn joint_log_likelihood(&self, vector: &FeatureVector) -> [f64; 2] {
        let mut out = self.base;
        for (c, slot) in out.iter_mut().enumerate() {
            for &f in vector.indices() {
                *slot += self.present_delta[c][f as usize];
            }
        }
        out
    }

    /// Posterior probability of OnHold.
    pub fn predict_proba(&self, vector: &FeatureVector) -> f64 {
        let [pos, neg] = self.joint_log_likelihood(vector);
        1.0 / (1.0 + (neg - pos).exp())
    }
}
