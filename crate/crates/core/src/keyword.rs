//! Okapi BM25 over code-cell source text, used for quoted keyword queries.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::CellId;
use crate::error::{Error, Result};
use crate::semantic::Hit;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ranking {
    #[default]
    Bm25,
    /// Sum of raw query-term frequencies, no length normalization.
    RawTf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
    #[serde(default)]
    pub ranking: Ranking,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75, ranking: Ranking::Bm25 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if self.k1 < 0.0 || !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidRequest(format!(
                "BM25 parameters out of range: k1={}, b={}",
                self.k1, self.b
            )));
        }
        Ok(())
    }
}

/// Lowercase, split on whitespace and punctuation other than `.` and `_`.
/// Dots at token edges are trimmed so `plot.hist` survives but `x.` does not.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| c.is_whitespace() || (!c.is_alphanumeric() && c != '.' && c != '_'))
        .map(|t| t.trim_matches('.'))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bm25Index {
    pub k1: f64,
    pub b: f64,
    pub avgdl: f64,
    pub doc_ids: Vec<CellId>,
    pub doc_lengths: Vec<usize>,
    /// term → `[(doc_ordinal, term_frequency)]` sorted by ordinal.
    pub postings: BTreeMap<String, Vec<(usize, usize)>>,
    #[serde(default)]
    pub ranking: Ranking,
}

fn mean_length(lengths: &[usize]) -> f64 {
    if lengths.is_empty() {
        0.0
    } else {
        lengths.iter().sum::<usize>() as f64 / lengths.len() as f64
    }
}

impl Bm25Index {
    pub fn build<S: AsRef<str>>(cells: &[(CellId, S)], params: Bm25Params) -> Self {
        let mut postings: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
        let mut doc_lengths = Vec::with_capacity(cells.len());
        let mut doc_ids = Vec::with_capacity(cells.len());
        for (ordinal, (id, source)) in cells.iter().enumerate() {
            let toks = tokenize(source.as_ref());
            doc_lengths.push(toks.len());
            doc_ids.push(id.clone());
            let mut tf: BTreeMap<String, usize> = BTreeMap::new();
            for t in toks {
                *tf.entry(t).or_insert(0) += 1;
            }
            for (term, count) in tf {
                postings.entry(term).or_default().push((ordinal, count));
            }
        }
        Self {
            k1: params.k1,
            b: params.b,
            avgdl: mean_length(&doc_lengths),
            doc_ids,
            doc_lengths,
            postings,
            ranking: params.ranking,
        }
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// Checks the structural invariants after deserialization and recomputes
    /// `avgdl` from the stored lengths.
    pub(crate) fn validate(&mut self) -> Result<()> {
        if self.doc_ids.len() != self.doc_lengths.len() {
            return Err(Error::CorruptIndex("bm25 doc_ids and doc_lengths differ in length".into()));
        }
        for list in self.postings.values() {
            let sorted = list.windows(2).all(|w| w[0].0 < w[1].0);
            let in_range = list.iter().all(|(ord, _)| *ord < self.doc_ids.len());
            if !sorted || !in_range {
                return Err(Error::CorruptIndex("bm25 postings out of order or range".into()));
            }
        }
        self.avgdl = mean_length(&self.doc_lengths);
        Ok(())
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.len() as f64;
        let df = self.document_frequency(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// All matching documents ranked by descending score, ties by ascending
    /// cell id. Documents scoring zero are omitted.
    pub fn rank_all(&self, query: &str) -> Result<Vec<Hit>> {
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        if terms.is_empty() {
            return Err(Error::EmptyQuery);
        }
        let mut scores: BTreeMap<usize, f64> = BTreeMap::new();
        for term in &terms {
            let Some(list) = self.postings.get(term) else { continue };
            let idf = self.idf(term);
            for &(ord, tf) in list {
                let tf = tf as f64;
                let contribution = match self.ranking {
                    Ranking::Bm25 => {
                        let len_norm = if self.avgdl > 0.0 {
                            self.doc_lengths[ord] as f64 / self.avgdl
                        } else {
                            0.0
                        };
                        idf * tf * (self.k1 + 1.0)
                            / (tf + self.k1 * (1.0 - self.b + self.b * len_norm))
                    }
                    Ranking::RawTf => tf,
                };
                *scores.entry(ord).or_insert(0.0) += contribution;
            }
        }
        let mut hits: Vec<Hit> = scores
            .into_iter()
            .filter(|(_, s)| *s > 0.0)
            .map(|(ord, score)| Hit { cell_id: self.doc_ids[ord].clone(), score })
            .collect();
        hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.cell_id.cmp(&b.cell_id)));
        Ok(hits)
    }

    pub fn search(&self, query: &str, k: usize) -> Result<Vec<Hit>> {
        let mut hits = self.rank_all(query)?;
        hits.truncate(k);
        Ok(hits)
    }
}
