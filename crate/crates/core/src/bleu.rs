//! Sentence-level BLEU for scoring generated descriptors against reference
//! comments.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuReport {
    /// Clipped n-gram precision per order. Orders longer than the candidate
    /// have no n-grams and are left out.
    pub per_n: BTreeMap<usize, f64>,
    pub cumulative: f64,
    pub brevity_penalty: f64,
}

impl BleuReport {
    fn zero(max_n: usize) -> Self {
        Self {
            per_n: (1..=max_n).map(|n| (n, 0.0)).collect(),
            cumulative: 0.0,
            brevity_penalty: 0.0,
        }
    }
}

fn tokens(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

fn ngram_counts(toks: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in toks.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// `max_n` is clamped to `1..=4`. The cumulative score is the geometric mean
/// of the available precisions with uniform weights, times the brevity penalty.
pub fn bleu(candidate: &str, reference: &str, max_n: usize) -> BleuReport {
    let max_n = max_n.clamp(1, MAX_ORDER);
    let cand = tokens(candidate);
    let refs = tokens(reference);
    if cand.is_empty() {
        return BleuReport::zero(max_n);
    }

    let mut per_n = BTreeMap::new();
    for n in 1..=max_n.min(cand.len()) {
        let cand_counts = ngram_counts(&cand, n);
        let ref_counts = ngram_counts(&refs, n);
        let clipped: usize = cand_counts
            .iter()
            .map(|(gram, &c)| c.min(ref_counts.get(gram).copied().unwrap_or(0)))
            .sum();
        let total = cand.len() + 1 - n;
        per_n.insert(n, clipped as f64 / total as f64);
    }

    let brevity_penalty = if cand.len() > refs.len() {
        1.0
    } else {
        (1.0 - refs.len() as f64 / cand.len() as f64).exp()
    };
    let cumulative = if per_n.values().any(|&p| p == 0.0) {
        0.0
    } else {
        let weight = 1.0 / per_n.len() as f64;
        brevity_penalty * per_n.values().map(|p| weight * p.ln()).sum::<f64>().exp()
    };
    BleuReport { per_n, cumulative, brevity_penalty }
}

/// Mean of per-sentence reports, as printed by `eval-bleu`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BleuSummary {
    pub sentences: usize,
    pub mean_per_n: BTreeMap<usize, f64>,
    pub mean_cumulative: f64,
}

pub fn summarize(reports: &[BleuReport], max_n: usize) -> BleuSummary {
    let max_n = max_n.clamp(1, MAX_ORDER);
    let count = reports.len().max(1) as f64;
    let mean_per_n = (1..=max_n)
        .map(|n| {
            let sum: f64 = reports.iter().filter_map(|r| r.per_n.get(&n)).sum();
            let present = reports.iter().filter(|r| r.per_n.contains_key(&n)).count().max(1);
            (n, sum / present as f64)
        })
        .collect();
    BleuSummary {
        sentences: reports.len(),
        mean_per_n,
        mean_cumulative: reports.iter().map(|r| r.cumulative).sum::<f64>() / count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sentences_score_one() {
        let r = bleu("load the training data now", "load the training data now", 4);
        assert_eq!(r.cumulative, 1.0);
        assert_eq!(r.brevity_penalty, 1.0);
        let r = bleu("plot", "plot", 4);
        assert_eq!(r.cumulative, 1.0);
        assert_eq!(r.per_n.len(), 1);
    }

    #[test]
    fn unigram_clipping() {
        let r = bleu("the the the the", "the cat is on the mat", 4);
        assert_eq!(r.per_n[&1], 0.5);
        assert_eq!(r.cumulative, 0.0);
    }

    #[test]
    fn empty_candidate() {
        let r = bleu("", "some reference", 4);
        assert_eq!(r.cumulative, 0.0);
        assert!(r.per_n.values().all(|&p| p == 0.0));
    }

    #[test]
    fn brevity_penalty_applies_to_short_candidates() {
        let r = bleu("a b", "a b c d", 2);
        assert!((r.brevity_penalty - (-1.0f64).exp()).abs() < 1e-12);
        assert!((r.cumulative - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn trailing_whitespace_and_case_are_ignored() {
        assert_eq!(bleu("Load Data  ", "load data", 4), bleu("load data", "LOAD data\n", 4));
    }

    proptest::proptest! {
        #[test]
        fn self_bleu_is_one(words in proptest::collection::vec("[a-z]{1,6}", 1..12)) {
            let s = words.join(" ");
            proptest::prop_assert!((bleu(&s, &s, 4).cumulative - 1.0).abs() < 1e-12);
        }

        #[test]
        fn scores_are_bounded(
            c in proptest::collection::vec("[a-c]", 0..10),
            r in proptest::collection::vec("[a-c]", 0..10),
        ) {
            let rep = bleu(&c.join(" "), &r.join(" "), 4);
            proptest::prop_assert!((0.0..=1.0).contains(&rep.cumulative));
            for p in rep.per_n.values() {
                proptest::prop_assert!((0.0..=1.0).contains(p));
            }
        }
    }
}
