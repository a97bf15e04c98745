//! Evaluation statistics: fold splitting, classification metrics, rank
//! tests, effect sizes and agreement.

mod analytics;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

pub use analytics::{
    lifespan_stats, resolution_delay_stats, Distribution, IssueOutcome, LifespanSummary,
    RemovalCategory, RemovedOnHold, ResolutionDelaySummary, TimedLifecycle,
};

use crate::learner::Label;

/// Largest pooled sample size for which Mann-Whitney p-values are exact.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StatsError {
    #[error("cannot split {rows} rows into {k} folds")]
    TooManyFolds { k: usize, rows: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("both classes are required")]
    SingleClass,
    #[error("empty sample")]
    Empty,
    #[error("p-value {0} is outside [0, 1]")]
    InvalidPValue(f64),
    #[error("agreement is undefined: expected agreement is 1 but labelings differ")]
    DegenerateKappa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsConfig {
    pub alpha: f64,
    pub k: usize,
    /// Upper bounds of negligible, small and medium |d|.
    pub delta_thresholds: [f64; 3],
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            k: 10,
            delta_thresholds: [0.10, 0.33, 0.474],
        }
    }
}

fn check_k(k: usize, rows: usize) -> Result<(), StatsError> {
    if k == 0 || k > rows {
        return Err(StatsError::TooManyFolds { k, rows });
    }
    Ok(())
}

/// Shuffle `0..rows` with `seed` and deal it into `k` folds whose sizes
/// differ by at most one.
pub fn kfold_split(rows: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, StatsError> {
    check_k(k, rows)?;
    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(deal(&order, k))
}

/// Like [`kfold_split`], but each class is shuffled separately and dealt
/// in turn, so every fold gets its share of positives.
pub fn stratified_kfold_split(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, StatsError> {
    check_k(k, labels.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(labels.len());
    for class in [Label::OnHold, Label::CrossReference] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        order.extend(idx);
    }
    Ok(deal(&order, k))
}

fn deal(order: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut folds = vec![Vec::new(); k];
    for (pos, &i) in order.iter().enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    /// No positive predictions, so precision was set to 0.
    pub degenerate_precision: bool,
}

/// Precision, recall and F1 with OnHold as the positive class.
pub fn compute_metrics(predicted: &[Label], truth: &[Label]) -> Result<Metrics, StatsError> {
    if predicted.len() != truth.len() {
        return Err(StatsError::LengthMismatch(predicted.len(), truth.len()));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p.is_positive(), t.is_positive()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        precision,
        recall,
        f1,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        true_negatives: tn,
        degenerate_precision: tp + fp == 0,
    })
}

/// Midranks (1-based) of `values`, ties sharing the average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Rank-based area under the ROC curve.
pub fn compute_auc(scores: &[f64], truth: &[Label]) -> Result<f64, StatsError> {
    if scores.len() != truth.len() {
        return Err(StatsError::LengthMismatch(scores.len(), truth.len()));
    }
    let n_pos = truth.iter().filter(|l| l.is_positive()).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(StatsError::SingleClass);
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks
        .iter()
        .zip(truth)
        .filter(|(_, l)| l.is_positive())
        .map(|(r, _)| r)
        .sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub method: PValueMethod,
}

/// Two-sided Mann-Whitney U test.
///
/// Exact when the pooled size is at most [`EXACT_LIMIT`]: the null
/// distribution of U is counted over every way of drawing `xs.len()` of the
/// pooled midranks. Larger samples use the normal approximation with tie
/// and continuity corrections.
pub fn mann_whitney(xs: &[f64], ys: &[f64]) -> Result<MannWhitney, StatsError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(StatsError::Empty);
    }
    let (n, m) = (xs.len(), ys.len());
    let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let ranks = average_ranks(&pooled);
    let rank_sum: f64 = ranks[..n].iter().sum();
    let offset = (n * (n + 1)) as f64 / 2.0;
    let u = rank_sum - offset;
    let mean = (n * m) as f64 / 2.0;
    let observed = (u - mean).abs();

    if n + m <= EXACT_LIMIT {
        // Midranks are multiples of 1/2, so rank sums are exact integers in
        // half units.
        let halves: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
        let max_sum: usize = halves.iter().sum();
        // counts[j][s]: subsets of size j with half-unit rank sum s
        let mut counts = vec![vec![0u64; max_sum + 1]; n + 1];
        counts[0][0] = 1;
        for &h in &halves {
            for j in (1..=n).rev() {
                for s in (h..=max_sum).rev() {
                    counts[j][s] += counts[j - 1][s - h];
                }
            }
        }
        let total: u64 = counts[n].iter().sum();
        let extreme: u64 = counts[n]
            .iter()
            .enumerate()
            .filter(|&(s, _)| ((s as f64 / 2.0 - offset) - mean).abs() >= observed - 1e-9)
            .map(|(_, &c)| c)
            .sum();
        return Ok(MannWhitney {
            u,
            p: (extreme as f64 / total as f64).min(1.0),
            method: PValueMethod::Exact,
        });
    }

    let total = (n + m) as f64;
    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let variance = (n * m) as f64 / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if variance <= 0.0 {
        return Ok(MannWhitney {
            u,
            p: 1.0,
            method: PValueMethod::Normal,
        });
    }
    let z = ((observed - 0.5).max(0.0)) / variance.sqrt();
    let normal = Normal::standard();
    let p = (2.0 * (1.0 - normal.cdf(z))).min(1.0);
    Ok(MannWhitney {
        u,
        p,
        method: PValueMethod::Normal,
    })
}

/// Holm step-down adjustment, returned in input order.
pub fn holm_correct(pvalues: &[f64]) -> Result<Vec<f64>, StatsError> {
    if let Some(&bad) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(StatsError::InvalidPValue(bad));
    }
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0_f64;
    for (rank, &idx) in order.iter().enumerate() {
        let scaled = (pvalues[idx] * (m - rank) as f64).min(1.0);
        running = running.max(scaled);
        adjusted[idx] = running;
    }
    Ok(adjusted)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl Magnitude {
    pub fn classify(delta: f64, thresholds: &[f64; 3]) -> Self {
        let d = delta.abs();
        if d < thresholds[0] {
            Magnitude::Negligible
        } else if d < thresholds[1] {
            Magnitude::Small
        } else if d < thresholds[2] {
            Magnitude::Medium
        } else {
            Magnitude::Large
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Magnitude::Negligible => "negligible",
            Magnitude::Small => "small",
            Magnitude::Medium => "medium",
            Magnitude::Large => "large",
        }
    }
}

/// Cliff's delta of `xs` over `ys`, with the default magnitude thresholds.
pub fn cliffs_delta(xs: &[f64], ys: &[f64]) -> Result<(f64, Magnitude), StatsError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut ys_sorted = ys.to_vec();
    ys_sorted.sort_by(f64::total_cmp);
    let mut dominance: i64 = 0;
    for &x in xs {
        let below = ys_sorted.partition_point(|&y| y < x) as i64;
        let not_above = ys_sorted.partition_point(|&y| y <= x) as i64;
        let above = ys_sorted.len() as i64 - not_above;
        dominance += below - above;
    }
    let d = dominance as f64 / (xs.len() * ys.len()) as f64;
    Ok((d, Magnitude::classify(d, &StatsConfig::default().delta_thresholds)))
}

/// Cohen's kappa with marginal-product chance agreement.
pub fn cohens_kappa<T: Ord + Clone>(a: &[T], b: &[T]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = a.len() as f64;
    let categories: BTreeSet<&T> = a.iter().chain(b).collect();
    let observed = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let expected: f64 = categories
        .iter()
        .map(|c| {
            let pa = a.iter().filter(|x| x == c).count() as f64 / n;
            let pb = b.iter().filter(|x| x == c).count() as f64 / n;
            pa * pb
        })
        .sum();
    if (1.0 - expected).abs() < f64::EPSILON {
        return if a == b {
            Ok(1.0)
        } else {
            Err(StatsError::DegenerateKappa)
        };
    }
    Ok((observed - expected) / (1.0 - expected))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricName {
    Precision,
    Recall,
    F1,
    Auc,
}

impl MetricName {
    pub const ALL: [MetricName; 4] = [MetricName::Precision, MetricName::Recall, MetricName::F1, MetricName::Auc];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Precision => "precision",
            MetricName::Recall => "recall",
            MetricName::F1 => "f1",
            MetricName::Auc => "auc",
        }
    }
}

/// Per-fold scores of one evaluated variant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FoldScores {
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub auc: Vec<f64>,
}

impl FoldScores {
    pub fn push(&mut self, metrics: &Metrics, auc: f64) {
        self.precision.push(metrics.precision);
        self.recall.push(metrics.recall);
        self.f1.push(metrics.f1);
        self.auc.push(auc);
    }

    pub fn metric(&self, name: MetricName) -> &[f64] {
        match name {
            MetricName::Precision => &self.precision,
            MetricName::Recall => &self.recall,
            MetricName::F1 => &self.f1,
            MetricName::Auc => &self.auc,
        }
    }

    pub fn mean(&self, name: MetricName) -> f64 {
        let v = self.metric(name);
        if v.is_empty() {
            return f64::NAN;
        }
        v.iter().sum::<f64>() / v.len() as f64
    }

    pub fn folds(&self) -> usize {
        self.precision.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub first: String,
    pub second: String,
    pub metric: MetricName,
    pub p_value: f64,
    pub adjusted_p_value: f64,
    pub cliffs_delta: f64,
    pub magnitude: Magnitude,
    pub significant: bool,
}

/// Compare every pair of variants on every metric with Mann-Whitney,
/// Holm-adjusting within each metric across all pairs.
pub fn compare_variants(
    variants: &[(String, FoldScores)],
    config: &StatsConfig,
) -> Result<Vec<ComparisonResult>, StatsError> {
    let mut out = Vec::new();
    for metric in MetricName::ALL {
        let mut family = Vec::new();
        for i in 0..variants.len() {
            for j in i + 1..variants.len() {
                let (a, b) = (variants[i].1.metric(metric), variants[j].1.metric(metric));
                let test = mann_whitney(a, b)?;
                let (d, _) = cliffs_delta(a, b)?;
                family.push((i, j, test.p, d));
            }
        }
        let adjusted = holm_correct(&family.iter().map(|f| f.2).collect::<Vec<_>>())?;
        for ((i, j, p, d), adj) in family.into_iter().zip(adjusted) {
            out.push(ComparisonResult {
                first: variants[i].0.clone(),
                second: variants[j].0.clone(),
                metric,
                p_value: p,
                adjusted_p_value: adj,
                cliffs_delta: d,
                magnitude: Magnitude::classify(d, &config.delta_thresholds),
                significant: adj < config.alpha,
            });
        }
    }
    Ok(out)
}

/// Linear-interpolation quantile of sorted data, `q` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    match sorted[lo].partial_cmp(&sorted[hi]) {
        Some(Ordering::Equal) | None => sorted[lo],
        _ => sorted[lo] + (sorted[hi] - sorted[lo]) * frac,
    }
}
