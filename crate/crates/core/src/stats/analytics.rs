//! Life spans of removed comments and how removal relates to issue
//! resolution. All day arithmetic is on UTC calendar dates.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::quantile_sorted;
use crate::learner::Label;

fn days_between(from: DateTime<Utc>, to: DateTime<Utc>) -> i64 {
    (to.date_naive() - from.date_naive()).num_days()
}

/// Quantile summary suitable for drawing a violin or box plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    /// Deciles 0.0, 0.1, ..., 1.0.
    pub deciles: Vec<f64>,
}

impl Distribution {
    pub fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| quantile_sorted(&sorted, p);
        let mean = if sorted.is_empty() {
            f64::NAN
        } else {
            sorted.iter().sum::<f64>() / sorted.len() as f64
        };
        Self {
            count: sorted.len(),
            min: q(0.0),
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: q(1.0),
            mean,
            deciles: (0..=10).map(|i| q(i as f64 / 10.0)).collect(),
        }
    }
}

/// A labeled comment lifecycle reduced to its dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedLifecycle {
    pub label: Label,
    pub introduced: DateTime<Utc>,
    pub removed: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanSummary {
    pub on_hold: Distribution,
    pub cross_reference: Distribution,
    /// Life spans in days, per class, in input order.
    pub on_hold_days: Vec<i64>,
    pub cross_reference_days: Vec<i64>,
}

/// Life-span distributions of removed comments, per class. Comments that
/// are still present are ignored.
pub fn lifespan_stats(lifecycles: &[TimedLifecycle]) -> LifespanSummary {
    let mut on_hold_days = Vec::new();
    let mut cross_reference_days = Vec::new();
    for lc in lifecycles {
        let Some(removed) = lc.removed else { continue };
        let days = days_between(lc.introduced, removed).max(0);
        match lc.label {
            Label::OnHold => on_hold_days.push(days),
            Label::CrossReference => cross_reference_days.push(days),
        }
    }
    let as_f64 = |v: &[i64]| v.iter().map(|&d| d as f64).collect::<Vec<_>>();
    LifespanSummary {
        on_hold: Distribution::of(&as_f64(&on_hold_days)),
        cross_reference: Distribution::of(&as_f64(&cross_reference_days)),
        on_hold_days,
        cross_reference_days,
    }
}

/// What became of the issue an On-hold comment waits on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssueOutcome {
    /// Closed with an accepted resolution (not open, not won't-fix).
    pub resolved: bool,
    pub resolved_date: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovedOnHold {
    pub removed: DateTime<Utc>,
    /// `None` when the issue could not be looked up.
    pub issue: Option<IssueOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalCategory {
    RemovedAfterResolution,
    RemovedBeforeResolution,
    IssueOpenOrWontFix,
    Unknown,
}

impl RemovalCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            RemovalCategory::RemovedAfterResolution => "removed_after_resolution",
            RemovalCategory::RemovedBeforeResolution => "removed_before_resolution",
            RemovalCategory::IssueOpenOrWontFix => "issue_open_or_wontfix",
            RemovalCategory::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionDelaySummary {
    pub total: usize,
    pub removed_after: usize,
    pub removed_before: usize,
    pub open_or_wontfix: usize,
    pub unknown: usize,
    /// Days from resolution to removal, for comments removed after.
    pub delays: Vec<i64>,
    pub delay_distribution: Distribution,
    /// Share of removed-after comments removed on the resolution day.
    pub same_day_fraction: f64,
    /// Share of removed-after comments removed more than 365 days later.
    pub over_one_year_fraction: f64,
    pub categories: Vec<RemovalCategory>,
}

pub fn categorize(item: &RemovedOnHold) -> (RemovalCategory, Option<i64>) {
    match &item.issue {
        None => (RemovalCategory::Unknown, None),
        Some(IssueOutcome { resolved: false, .. }) | Some(IssueOutcome { resolved_date: None, .. }) => {
            (RemovalCategory::IssueOpenOrWontFix, None)
        }
        Some(IssueOutcome {
            resolved_date: Some(resolved),
            ..
        }) => {
            let days = days_between(*resolved, item.removed);
            if days >= 0 {
                (RemovalCategory::RemovedAfterResolution, Some(days))
            } else {
                (RemovalCategory::RemovedBeforeResolution, None)
            }
        }
    }
}

/// Split removed On-hold comments by when they went relative to their
/// issue's resolution, and summarize the delays of those removed after.
pub fn resolution_delay_stats(items: &[RemovedOnHold]) -> ResolutionDelaySummary {
    let mut summary = ResolutionDelaySummary {
        total: items.len(),
        removed_after: 0,
        removed_before: 0,
        open_or_wontfix: 0,
        unknown: 0,
        delays: Vec::new(),
        delay_distribution: Distribution::of(&[]),
        same_day_fraction: 0.0,
        over_one_year_fraction: 0.0,
        categories: Vec::with_capacity(items.len()),
    };
    for item in items {
        let (category, delay) = categorize(item);
        match category {
            RemovalCategory::RemovedAfterResolution => summary.removed_after += 1,
            RemovalCategory::RemovedBeforeResolution => summary.removed_before += 1,
            RemovalCategory::IssueOpenOrWontFix => summary.open_or_wontfix += 1,
            RemovalCategory::Unknown => summary.unknown += 1,
        }
        summary.delays.extend(delay);
        summary.categories.push(category);
    }
    let after = summary.delays.len();
    if after > 0 {
        summary.same_day_fraction = summary.delays.iter().filter(|&&d| d == 0).count() as f64 / after as f64;
        summary.over_one_year_fraction = summary.delays.iter().filter(|&&d| d > 365).count() as f64 / after as f64;
    }
    let as_f64: Vec<f64> = summary.delays.iter().map(|&d| d as f64).collect();
    summary.delay_distribution = Distribution::of(&as_f64);
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn day(y: i32, m: u32, d: u32, h: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, h, 0, 0).unwrap()
    }

    #[test]
    fn lifespans() {
        let lcs = vec![
            TimedLifecycle { label: Label::OnHold, introduced: day(2020, 1, 1, 23), removed: Some(day(2020, 1, 6, 1)) },
            TimedLifecycle { label: Label::OnHold, introduced: day(2020, 1, 1, 0), removed: None },
            TimedLifecycle { label: Label::CrossReference, introduced: day(2020, 1, 1, 5), removed: Some(day(2020, 1, 1, 6)) },
        ];
        let s = lifespan_stats(&lcs);
        assert_eq!(s.on_hold_days, vec![5]);
        assert_eq!(s.on_hold.median, 5.0);
        assert_eq!(s.cross_reference.median, 0.0);
    }

    #[test]
    fn even_count_median_averages() {
        assert_eq!(Distribution::of(&[100.0, 139.0]).median, 119.5);
    }

    #[test]
    fn delay_categories() {
        let resolved = |d| Some(IssueOutcome { resolved: true, resolved_date: Some(d) });
        let items = vec![
            RemovedOnHold { removed: day(2020, 3, 1, 10), issue: resolved(day(2020, 3, 1, 12)) },
            RemovedOnHold { removed: day(2021, 6, 1, 0), issue: resolved(day(2020, 3, 1, 0)) },
            RemovedOnHold { removed: day(2020, 1, 1, 0), issue: resolved(day(2020, 3, 1, 0)) },
            RemovedOnHold { removed: day(2020, 1, 1, 0), issue: Some(IssueOutcome { resolved: false, resolved_date: None }) },
            RemovedOnHold { removed: day(2020, 1, 1, 0), issue: None },
        ];
        let s = resolution_delay_stats(&items);
        assert_eq!((s.removed_after, s.removed_before, s.open_or_wontfix, s.unknown), (2, 1, 1, 1));
        assert_eq!(s.delays, vec![0, 457]);
        assert_eq!(s.same_day_fraction, 0.5);
        assert_eq!(s.over_one_year_fraction, 0.5);
    }
}
