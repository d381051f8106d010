//! Descriptor vector space: tf-idf weights projected to a fixed dimension by
//! a seeded sparse random projection, searched by exact cosine scan.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::CellId;
use crate::error::{Error, Result};

pub const DEFAULT_DIM: usize = 300;
pub const DEFAULT_SEED: u64 = 0x6e62_7365_6172_6368;

pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "all", "also", "am", "an", "and", "any", "are", "as",
    "at", "be", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could",
    "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further", "had",
    "has", "have", "having", "he", "her", "here", "hers", "him", "his", "how", "i", "if", "in",
    "into", "is", "it", "its", "itself", "just", "me", "more", "most", "my", "no", "nor", "not",
    "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "out", "over", "own",
    "same", "she", "should", "so", "some", "such", "than", "that", "the", "their", "them", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "very", "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why",
    "will", "with", "would", "you", "your",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorizerConfig {
    pub dim: usize,
    pub seed: u64,
    pub min_token_len: usize,
}

impl Default for VectorizerConfig {
    fn default() -> Self {
        Self { dim: DEFAULT_DIM, seed: DEFAULT_SEED, min_token_len: 2 }
    }
}

/// Hex SHA-256 of the newline-joined stopword list.
pub fn stopwords_hash() -> String {
    hex::encode(Sha256::digest(STOPWORDS.join("\n").as_bytes()))
}

pub fn tokenize(text: &str, cfg: &VectorizerConfig) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| t.chars().count() >= cfg.min_token_len && !STOPWORDS.contains(&t.as_str()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermStats {
    pub index: usize,
    pub document_frequency: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub terms: BTreeMap<String, TermStats>,
    pub document_count: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn idf(&self, stats: &TermStats) -> f64 {
        (self.document_count as f64 / (1.0 + stats.document_frequency as f64)).ln() + 1.0
    }
}

/// Term indices follow lexicographic term order.
pub fn fit<S: AsRef<str>>(descriptors: &[S], cfg: &VectorizerConfig) -> Result<Vocabulary> {
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for d in descriptors {
        let unique: HashSet<String> = tokenize(d.as_ref(), cfg).into_iter().collect();
        for t in unique {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    if df.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let terms = df
        .into_iter()
        .enumerate()
        .map(|(index, (term, document_frequency))| (term, TermStats { index, document_frequency }))
        .collect();
    Ok(Vocabulary { terms, document_count: descriptors.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DescriptorVector(pub Vec<f32>);

impl DescriptorVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum()
}

/// Cosine similarity computed in f64; 0 when either side is the zero vector.
pub fn cosine(a: &DescriptorVector, b: &DescriptorVector) -> f64 {
    cosine_with_norms(a, a.norm(), b, b.norm())
}

fn cosine_with_norms(a: &DescriptorVector, na: f64, b: &DescriptorVector, nb: f64) -> f64 {
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(&a.0, &b.0) / (na * nb)).clamp(-1.0, 1.0)
}

/// One row of the projection matrix: nonzero `(component, sign)` entries.
type ProjectionRow = Vec<(u32, f32)>;

fn projection_row(term: &str, cfg: &VectorizerConfig) -> ProjectionRow {
    let mut hasher = Sha256::new();
    hasher.update(cfg.seed.to_le_bytes());
    hasher.update(term.as_bytes());
    let mut rng = ChaCha8Rng::from_seed(hasher.finalize().into());
    (0..cfg.dim as u32)
        .filter_map(|d| match rng.random_range(0..6u8) {
            0 => Some((d, 1.0)),
            1 => Some((d, -1.0)),
            _ => None,
        })
        .collect()
}

/// Maps text to unit-norm vectors in the space fitted on the descriptor corpus.
#[derive(Debug, Clone)]
pub struct Vectorizer {
    cfg: VectorizerConfig,
    vocab: Vocabulary,
    idf: Vec<f64>,
    rows: Vec<ProjectionRow>,
    scale: f64,
}

impl Vectorizer {
    pub fn new(vocab: Vocabulary, cfg: VectorizerConfig) -> Self {
        let mut idf = vec![0.0; vocab.len()];
        let mut rows = vec![Vec::new(); vocab.len()];
        for (term, stats) in &vocab.terms {
            idf[stats.index] = vocab.idf(stats);
            rows[stats.index] = projection_row(term, &cfg);
        }
        let scale = (3.0 / cfg.dim as f64).sqrt();
        Self { cfg, vocab, idf, rows, scale }
    }

    pub fn config(&self) -> &VectorizerConfig {
        &self.cfg
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Sparse tf-idf weights (raw term counts times idf) keyed by term index.
    pub fn tfidf(&self, text: &str) -> BTreeMap<usize, f64> {
        let mut weights = BTreeMap::new();
        for tok in tokenize(text, &self.cfg) {
            if let Some(stats) = self.vocab.terms.get(&tok) {
                *weights.entry(stats.index).or_insert(0.0) += self.idf[stats.index];
            }
        }
        weights
    }

    pub fn vectorize(&self, text: &str) -> DescriptorVector {
        let mut acc = vec![0.0f64; self.cfg.dim];
        for (term, weight) in self.tfidf(text) {
            for &(d, sign) in &self.rows[term] {
                acc[d as usize] += weight * f64::from(sign) * self.scale;
            }
        }
        let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return DescriptorVector::zeros(self.cfg.dim);
        }
        DescriptorVector(acc.into_iter().map(|v| (v / norm) as f32).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hit {
    pub cell_id: CellId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TopK {
    pub hits: Vec<Hit>,
    /// Set when the query had no in-vocabulary tokens.
    pub out_of_vocabulary: bool,
}

/// Stored descriptor vectors, scanned exhaustively at query time.
#[derive(Debug, Clone, Default)]
pub struct SemanticIndex {
    ids: Vec<CellId>,
    vectors: Vec<DescriptorVector>,
    norms: Vec<f64>,
}

impl SemanticIndex {
    pub fn new(entries: Vec<(CellId, DescriptorVector)>) -> Self {
        let mut index = Self::default();
        for (id, v) in entries {
            index.norms.push(v.norm());
            index.ids.push(id);
            index.vectors.push(v);
        }
        index
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&CellId, &DescriptorVector)> {
        self.ids.iter().zip(&self.vectors)
    }

    pub fn vector_at(&self, position: usize) -> Option<&DescriptorVector> {
        self.vectors.get(position)
    }

    /// All stored cells ranked by descending cosine, ties by ascending cell id.
    pub fn rank_all(&self, query: &DescriptorVector) -> Vec<Hit> {
        let qn = query.norm();
        let mut hits: Vec<Hit> = self
            .ids
            .iter()
            .zip(&self.vectors)
            .zip(&self.norms)
            .map(|((id, v), &n)| Hit {
                cell_id: id.clone(),
                score: cosine_with_norms(query, qn, v, n),
            })
            .collect();
        hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.cell_id.cmp(&b.cell_id)));
        hits
    }

    /// With `dedup`, each notebook is represented by its best-scoring cell only.
    pub fn top_k(&self, query: &DescriptorVector, k: usize, dedup: bool) -> Result<TopK> {
        if self.is_empty() {
            return Err(Error::IndexNotBuilt);
        }
        if query.is_zero() {
            return Ok(TopK { hits: Vec::new(), out_of_vocabulary: true });
        }
        Ok(TopK { hits: take_top(self.rank_all(query), k, dedup), out_of_vocabulary: false })
    }
}

/// First `k` hits of an already ranked list, optionally one per notebook.
pub(crate) fn take_top(ranked: Vec<Hit>, k: usize, dedup: bool) -> Vec<Hit> {
    let mut seen = HashSet::new();
    ranked
        .into_iter()
        .filter(|h| !dedup || seen.insert(h.cell_id.notebook_id.clone()))
        .take(k)
        .collect()
}
