use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rng_for, Label};
use crate::features::FeatureVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        /// Weighted share of OnHold rows that reached the leaf.
        positive: f64,
    },
    Split {
        feature: u32,
        absent: usize,
        present: usize,
    },
}

/// A binary decision tree over feature presence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn leaf_positive(&self, vector: &FeatureVector) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { positive } => return *positive,
                Node::Split { feature, absent, present } => {
                    at = if vector.contains(*feature) { *present } else { *absent };
                }
            }
        }
    }

    /// The tree's vote; an evenly split leaf votes OnHold.
    pub fn votes_on_hold(&self, vector: &FeatureVector) -> bool {
        self.leaf_positive(vector) >= 0.5
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { absent, present, .. } => 1 + walk(nodes, *absent).max(walk(nodes, *present)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Bagged or extremely randomized tree ensemble with gini splits and
/// `sqrt(dim)` candidate features per node.
///
/// Features are binary, so an extremely randomized split's threshold is
/// always 0.5 and the two ensembles differ only in row bootstrapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<Tree>,
    bootstrap: bool,
}

struct Builder<'a, R: Rng> {
    rows: &'a [(FeatureVector, Label)],
    weights: Vec<u32>,
    dim: usize,
    max_features: usize,
    max_depth: Option<usize>,
    rng: R,
    nodes: Vec<Node>,
    // scratch: per-feature (weight, positive weight), reset after each node
    counts: Vec<(u32, u32)>,
}

impl<R: Rng> Builder<'_, R> {
    fn grow(&mut self, members: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { positive: 0.0 });
        let (total, pos) = members.iter().fold((0u32, 0u32), |(t, p), &i| {
            let w = self.weights[i];
            (t + w, p + if self.rows[i].1.is_positive() { w } else { 0 })
        });
        let leaf = Node::Leaf {
            positive: if total == 0 { 0.0 } else { pos as f64 / total as f64 },
        };
        if pos == 0 || pos == total || total < 2 || self.max_depth.is_some_and(|d| depth >= d) {
            self.nodes[id] = leaf;
            return id;
        }

        let mut touched: Vec<u32> = Vec::new();
        for &i in &members {
            let w = self.weights[i];
            let positive = self.rows[i].1.is_positive();
            for &f in self.rows[i].0.indices() {
                let c = &mut self.counts[f as usize];
                if c.0 == 0 {
                    touched.push(f);
                }
                c.0 += w;
                if positive {
                    c.1 += w;
                }
            }
        }
        touched.sort_unstable();
        let usable: Vec<u32> = touched
            .iter()
            .copied()
            .filter(|&f| self.counts[f as usize].0 < total)
            .collect();

        let mut best: Option<(f64, u32)> = None;
        if !usable.is_empty() {
            let draw = self.max_features.min(usable.len());
            for pick in sample(&mut self.rng, usable.len(), draw).into_iter() {
                let f = usable[pick];
                let (ft, fp) = self.counts[f as usize];
                let impurity = split_gini(total, pos, ft, fp);
                if best.is_none_or(|(b, _)| impurity < b) {
                    best = Some((impurity, f));
                }
            }
        }
        for f in touched {
            self.counts[f as usize] = (0, 0);
        }

        let Some((_, feature)) = best else {
            self.nodes[id] = leaf;
            return id;
        };
        let (present, absent): (Vec<usize>, Vec<usize>) =
            members.into_iter().partition(|&i| self.rows[i].0.contains(feature));
        let absent_id = self.grow(absent, depth + 1);
        let present_id = self.grow(present, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            absent: absent_id,
            present: present_id,
        };
        id
    }
}

fn gini(total: u32, pos: u32) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

/// Weighted child impurity of splitting on a feature present in `ft` rows
/// (`fp` of them positive).
fn split_gini(total: u32, pos: u32, ft: u32, fp: u32) -> f64 {
    let (at, ap) = (total - ft, pos - fp);
    (at as f64 * gini(at, ap) + ft as f64 * gini(ft, fp)) / total as f64
}

impl Forest {
    pub(super) fn fit(
        rows: &[(FeatureVector, Label)],
        dim: usize,
        n_trees: usize,
        max_depth: Option<usize>,
        bootstrap: bool,
        seed: u64,
    ) -> Self {
        let max_features = ((dim as f64).sqrt().floor() as usize).max(1);
        let trees = (0..n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_for(seed, t as u64);
                let mut weights = vec![0u32; rows.len()];
                if bootstrap {
                    for _ in 0..rows.len() {
                        weights[rng.random_range(0..rows.len())] += 1;
                    }
                } else {
                    weights.fill(1);
                }
                let members: Vec<usize> = (0..rows.len()).filter(|&i| weights[i] > 0).collect();
                let mut builder = Builder {
                    rows,
                    weights,
                    dim,
                    max_features,
                    max_depth,
                    rng,
                    nodes: Vec::new(),
                    counts: vec![(0, 0); dim],
                };
                builder.grow(members, 0);
                debug_assert!(builder.dim == dim);
                Tree { nodes: builder.nodes }
            })
            .collect();
        Self { trees, bootstrap }
    }

    /// Fraction of trees voting OnHold.
    pub fn predict_proba(&self, vector: &FeatureVector) -> f64 {
        let votes = self.trees.iter().filter(|t| t.votes_on_hold(vector)).count();
        votes as f64 / self.trees.len() as f64
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_of_pure_split_is_zero() {
        assert_eq!(split_gini(4, 2, 2, 2), 0.0);
        assert!((split_gini(4, 2, 2, 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unanimous_vote_is_one() {
        let rows = vec![
            (FeatureVector::from_indices([0]), Label::OnHold),
            (FeatureVector::from_indices([1]), Label::CrossReference),
        ];
        let forest = Forest::fit(&rows, 2, 100, None, false, 9);
        assert_eq!(forest.predict_proba(&FeatureVector::from_indices([0])), 1.0);
        assert_eq!(forest.predict_proba(&FeatureVector::from_indices([1])), 0.0);
    }

    #[test]
    fn depth_limit_respected() {
        let rows: Vec<_> = (0..16u32)
            .map(|i| {
                let idx: Vec<u32> = (0..4).filter(|b| i >> b & 1 == 1).collect();
                let label = if idx.len().is_multiple_of(2) { Label::OnHold } else { Label::CrossReference };
                (FeatureVector::from_indices(idx), label)
            })
            .collect();
        let forest = Forest::fit(&rows, 4, 10, Some(2), false, 1);
        assert!(forest.trees().iter().all(|t| t.depth() <= 2));
    }
}
