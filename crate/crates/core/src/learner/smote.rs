use rand::Rng;
use serde::{Deserialize, Serialize};

use super::knn::overlap;
use super::{rng_for, Dataset, Label, LearnError};
use crate::features::FeatureVector;

/// Provenance of one synthetic minority row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRow {
    /// Indices into the canonical minority rows.
    pub base: usize,
    pub neighbor: usize,
    pub gap: f64,
    /// Union of the parents' feature indices; the coordinates of `dense`.
    pub support: Vec<u32>,
    /// Interpolated values on `support`, before re-binarization.
    pub dense: Vec<f64>,
    pub row: FeatureVector,
}

/// `base + gap * (neighbor - base)`, coordinate-wise.
pub fn interpolate(base: &[f64], neighbor: &[f64], gap: f64) -> Vec<f64> {
    base.iter().zip(neighbor).map(|(b, n)| b + gap * (n - b)).collect()
}

fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// For each row, its `k` nearest other rows (ties to the lower index).
fn nearest(n: usize, k: usize, dist: impl Fn(usize, usize) -> f64) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| {
            let mut others: Vec<(f64, usize)> = (0..n).filter(|&j| j != i).map(|j| (dist(i, j), j)).collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// SMOTE on dense real-valued rows: `count` synthetic points, each on the
/// segment from a random row to one of its `k` nearest neighbours.
pub fn smote_dense(rows: &[Vec<f64>], count: usize, k: usize, seed: u64) -> Result<Vec<Vec<f64>>, LearnError> {
    if rows.len() < 2 {
        return Err(LearnError::MinorityTooSmall(rows.len()));
    }
    if k == 0 {
        return Err(LearnError::InvalidHyperparameter("k must be positive".into()));
    }
    let near = nearest(rows.len(), k.min(rows.len() - 1), |i, j| squared_euclidean(&rows[i], &rows[j]));
    let mut rng = rng_for(seed, 0x534d_4f54);
    Ok((0..count)
        .map(|_| {
            let base = rng.random_range(0..rows.len());
            let neighbor = near[base][rng.random_range(0..near[base].len())];
            let gap: f64 = rng.random();
            interpolate(&rows[base], &rows[neighbor], gap)
        })
        .collect())
}

/// Oversample the minority class to exact balance, reporting how each
/// synthetic row was made. Synthetic rows follow the original rows.
pub fn smote_oversample_traced(
    dataset: &Dataset,
    k: usize,
    seed: u64,
) -> Result<(Dataset, Vec<SyntheticRow>), LearnError> {
    if k == 0 {
        return Err(LearnError::InvalidHyperparameter("k must be positive".into()));
    }
    let pos = dataset.count(Label::OnHold);
    let neg = dataset.count(Label::CrossReference);
    let provenance = format!("{}+smote", dataset.provenance);
    if pos == neg {
        let mut out = dataset.clone();
        out.provenance = provenance;
        return Ok((out, Vec::new()));
    }
    let (minority_label, deficit) = if pos < neg { (Label::OnHold, neg - pos) } else { (Label::CrossReference, pos - neg) };
    let mut minority: Vec<&FeatureVector> = dataset
        .rows
        .iter()
        .filter(|(_, l)| *l == minority_label)
        .map(|(v, _)| v)
        .collect();
    if minority.len() < 2 {
        return Err(LearnError::MinorityTooSmall(minority.len()));
    }
    minority.sort();

    // Euclidean distance on binary vectors orders like symmetric difference.
    let near = nearest(minority.len(), k.min(minority.len() - 1), |i, j| {
        let (inter, union) = overlap(minority[i].indices(), minority[j].indices());
        (union - inter) as f64
    });
    let mut rng = rng_for(seed, 0x534d_4f54);
    let mut rows = dataset.rows.clone();
    let mut trace = Vec::with_capacity(deficit);
    for _ in 0..deficit {
        let base = rng.random_range(0..minority.len());
        let neighbor = near[base][rng.random_range(0..near[base].len())];
        let gap: f64 = rng.random();
        let (a, b) = (minority[base], minority[neighbor]);
        let support = FeatureVector::from_indices(a.indices().iter().chain(b.indices()).copied())
            .indices()
            .to_vec();
        let coords = |v: &FeatureVector| -> Vec<f64> { support.iter().map(|&f| f64::from(u8::from(v.contains(f)))).collect() };
        let dense = interpolate(&coords(a), &coords(b), gap);
        let row = FeatureVector::from_indices(support.iter().zip(&dense).filter(|(_, &x)| x >= 0.5).map(|(&f, _)| f));
        rows.push((row.clone(), minority_label));
        trace.push(SyntheticRow {
            base,
            neighbor,
            gap,
            support,
            dense,
            row,
        });
    }
    Ok((
        Dataset {
            rows,
            dim: dataset.dim,
            provenance,
        },
        trace,
    ))
}

pub fn smote_oversample(dataset: &Dataset, k: usize, seed: u64) -> Result<Dataset, LearnError> {
    smote_oversample_traced(dataset, k, seed).map(|(d, _)| d)
}
