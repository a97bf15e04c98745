use serde::{Deserialize, Serialize};

use super::Label;
use crate::features::FeatureVector;

/// `1 - |a ∩ b| / |a ∪ b|`; two empty sets are at distance 0.
pub fn jaccard_distance(a: &FeatureVector, b: &FeatureVector) -> f64 {
    let (inter, union) = overlap(a.indices(), b.indices());
    if union == 0 {
        0.0
    } else {
        1.0 - inter as f64 / union as f64
    }
}

/// (intersection, union) sizes of two sorted index lists.
pub(super) fn overlap(a: &[u32], b: &[u32]) -> (usize, usize) {
    let (mut i, mut j, mut inter) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    (inter, a.len() + b.len() - inter)
}

/// k-nearest neighbours under Jaccard distance. Ties in distance go to the
/// earlier training row in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    rows: Vec<(FeatureVector, Label)>,
    k: usize,
}

impl Knn {
    pub(super) fn fit(rows: Vec<(FeatureVector, Label)>, k: usize) -> Self {
        Self { rows, k }
    }

    pub fn neighbours(&self, vector: &FeatureVector) -> Vec<usize> {
        let mut scored: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, (v, _))| (jaccard_distance(vector, v), i))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        scored.truncate(self.k.min(self.rows.len()));
        scored.into_iter().map(|(_, i)| i).collect()
    }

    /// Share of OnHold rows among the neighbours.
    pub fn predict_proba(&self, vector: &FeatureVector) -> f64 {
        let near = self.neighbours(vector);
        let pos = near.iter().filter(|&&i| self.rows[i].1.is_positive()).count();
        pos as f64 / near.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jaccard_values() {
        let a = FeatureVector::from_indices([1, 2, 3]);
        let b = FeatureVector::from_indices([2, 3, 4]);
        assert!((jaccard_distance(&a, &b) - 0.5).abs() < 1e-12);
        assert_eq!(jaccard_distance(&FeatureVector::default(), &FeatureVector::default()), 0.0);
        assert_eq!(jaccard_distance(&a, &FeatureVector::default()), 1.0);
    }

    #[test]
    fn ties_prefer_earlier_rows() {
        let rows = vec![
            (FeatureVector::from_indices([9]), Label::OnHold),
            (FeatureVector::from_indices([8]), Label::CrossReference),
        ];
        let knn = Knn::fit(rows, 1);
        assert_eq!(knn.neighbours(&FeatureVector::from_indices([0])), vec![0]);
    }

    #[test]
    fn share_of_positive_neighbours() {
        // Five rows share feature 0 with the query; three of them are OnHold.
        // The far row is never among the five nearest.
        let near = |i: u32| FeatureVector::from_indices([0, i]);
        let rows = vec![
            (near(1), Label::OnHold),
            (near(2), Label::CrossReference),
            (near(3), Label::OnHold),
            (near(4), Label::CrossReference),
            (near(5), Label::OnHold),
            (FeatureVector::from_indices([7]), Label::CrossReference),
        ];
        let knn = Knn::fit(rows, 5);
        assert!((knn.predict_proba(&FeatureVector::from_indices([0])) - 0.6).abs() < 1e-12);
    }
}
