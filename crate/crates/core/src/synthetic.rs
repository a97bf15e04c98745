//! A generated comment corpus with a known separating signal.
//!
//! On-hold comments wait on an issue ("remove after HADOOP-12", "once
//! HADOOP-9 lands"); cross-reference comments cite one for context. Both
//! share the same filler vocabulary, so only the waiting phrases separate
//! the classes.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::learner::{rng_for, Label};

const FILLER: [&str; 24] = [
    "the", "buffer", "size", "is", "handled", "here", "for", "the", "reader", "path", "config", "value", "when",
    "stream", "closes", "cache", "entry", "and", "retry", "logic", "in", "this", "block", "server",
];

const ON_HOLD: [&str; 8] = [
    "TODO: remove after {issue} is fixed",
    "workaround, remove after {issue}",
    "return type will change once {issue} is completed",
    "FIXME: simplify once {issue} is committed",
    "can be dropped once {issue} lands",
    "hack until {issue}; remove after {issue} is resolved",
    "temporary copy, remove after {issue}",
    "switch to the new API once {issue} is in",
];

const CROSS_REFERENCE: [&str; 8] = [
    "see {issue} for details",
    "added for {issue}",
    "fix for {issue}: guard against null",
    "copied from {issue}",
    "regression test for {issue}",
    "as discussed in {issue}",
    "introduced by {issue}",
    "{issue}: keep the original order",
];

fn filler(rng: &mut impl Rng, words: usize) -> String {
    (0..words)
        .map(|_| *FILLER.choose(rng).expect("filler"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// `total` raw comments with Jira keys for project `HADOOP`, of which
/// `on_hold` are On-hold. Deterministic in `seed`.
pub fn synthetic_corpus(total: usize, on_hold: usize, seed: u64) -> Vec<(String, Label)> {
    let mut rng = rng_for(seed, 0x5917);
    let mut out = Vec::with_capacity(total);
    for i in 0..total {
        let (templates, label) = if i < on_hold {
            (&ON_HOLD, Label::OnHold)
        } else {
            (&CROSS_REFERENCE, Label::CrossReference)
        };
        let template = templates.choose(&mut rng).expect("template");
        let issue = format!("HADOOP-{}", rng.random_range(1000..20000));
        let core = template.replace("{issue}", &issue);
        let before = rng.random_range(0..5);
        let after = rng.random_range(0..5);
        let text = format!("// {} {} {}", filler(&mut rng, before), core, filler(&mut rng, after));
        out.push((text.split_whitespace().collect::<Vec<_>>().join(" "), label));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_determinism() {
        let a = synthetic_corpus(100, 10, 3);
        assert_eq!(a.len(), 100);
        assert_eq!(a.iter().filter(|(_, l)| *l == Label::OnHold).count(), 10);
        assert_eq!(a, synthetic_corpus(100, 10, 3));
        assert!(a[0].0.contains("HADOOP-"));
    }
}
