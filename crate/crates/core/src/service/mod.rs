//! Query orchestration over a built index: routing, result assembly,
//! notebook detail, shared-identifier links, persistence and HTTP.

pub mod http;
mod persist;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::{progressive_align, AlignmentGrid, AlignmentParams, CellSequence};
use crate::analysis::{extract_identifiers, overlap_links, shared_identifiers, IdentifierSet, LinkQuery};
use crate::corpus::{CellId, CellKind, RawNotebook};
use crate::descriptor::{generate_descriptor, CodeDescriptorPair, ExternalDescriptors, Origin};
use crate::error::{Error, Result};
use crate::keyword::{Bm25Index, Bm25Params};
use crate::semantic::{cosine, fit, take_top, DescriptorVector, SemanticIndex, Vectorizer, VectorizerConfig};

pub use persist::{INDEX_FORMAT_VERSION, VECTORS_MAGIC};

pub const DEFAULT_K: usize = 10;
/// Notebooks ranked past this many share the gray color bucket.
pub const COLOR_BUCKETS: usize = 20;
pub const SNIPPET_LINES: usize = 5;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub vectorizer: VectorizerConfig,
    pub bm25: Bm25Params,
    pub alignment: AlignmentParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Semantic,
    Keyword,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedQuery {
    pub mode: SearchMode,
    pub terms: String,
}

/// A query wrapped entirely in double quotes is a keyword query; anything
/// else, including a quoted fragment inside a sentence, is semantic.
pub fn parse_query(text: &str) -> Result<ParsedQuery> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let quoted = trimmed.len() >= 2
        && trimmed.starts_with('"')
        && trimmed.ends_with('"')
        && !trimmed[1..trimmed.len() - 1].contains('"');
    if quoted {
        let inner = trimmed[1..trimmed.len() - 1].trim();
        if inner.is_empty() {
            return Err(Error::EmptyQuery);
        }
        return Ok(ParsedQuery { mode: SearchMode::Keyword, terms: inner.to_string() });
    }
    Ok(ParsedQuery { mode: SearchMode::Semantic, terms: trimmed.to_string() })
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_dedup() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub query: String,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_dedup")]
    pub dedup: bool,
}

impl SearchRequest {
    pub fn new(query: impl Into<String>) -> Self {
        Self { query: query.into(), k: DEFAULT_K, dedup: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchItem {
    pub rank: usize,
    pub cell_id: CellId,
    pub notebook_id: String,
    pub score: f64,
    pub snippet: String,
    pub identifiers: IdentifierSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NotebookEntry {
    pub notebook_id: String,
    pub path: String,
    pub color_ordinal: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResponse {
    pub mode: SearchMode,
    pub items: Vec<SearchItem>,
    pub notebooks: Vec<NotebookEntry>,
    pub grid: AlignmentGrid,
    pub flags: BTreeSet<String>,
}

pub const FLAG_OUT_OF_VOCABULARY: &str = "out_of_vocabulary";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetailCell {
    pub index: usize,
    pub kind: CellKind,
    pub source: String,
    pub similarity_to_anchor: f64,
    pub identifiers: IdentifierSet,
    pub shared_with_anchor: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NotebookDetail {
    pub notebook_id: String,
    pub path: String,
    pub anchor_index: usize,
    pub cells: Vec<DetailCell>,
}

/// Corpus counts reported after ingest.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexStats {
    pub notebooks: usize,
    pub cells: usize,
    pub code_cells: usize,
    pub markdown_cells: usize,
    pub blank_code_cells: usize,
    pub indexed_cells: usize,
    pub origins: BTreeMap<Origin, usize>,
}

pub fn color_ordinal(rank_position: usize) -> usize {
    rank_position.min(COLOR_BUCKETS)
}

fn snippet(source: &str) -> String {
    source.lines().take(SNIPPET_LINES).collect::<Vec<_>>().join("\n")
}

/// An immutable, fully built search state.
#[derive(Debug, Clone)]
pub struct Engine {
    config: EngineConfig,
    notebooks: Vec<RawNotebook>,
    notebook_pos: HashMap<String, usize>,
    identifiers: BTreeMap<CellId, IdentifierSet>,
    pairs: Vec<CodeDescriptorPair>,
    pair_pos: HashMap<CellId, usize>,
    vectorizer: Vectorizer,
    semantic: SemanticIndex,
    keyword: Bm25Index,
}

impl Engine {
    /// Builds every index from parsed notebooks. Notebooks are ordered by path;
    /// byte-identical duplicates (same id) are kept once. Blank code cells
    /// stay in their notebooks but are not indexed.
    pub fn build(
        notebooks: Vec<RawNotebook>,
        external: Option<&ExternalDescriptors>,
        config: EngineConfig,
    ) -> Result<Self> {
        config.bm25.validate()?;
        let mut notebooks = notebooks;
        notebooks.sort_by(|a, b| a.path.cmp(&b.path).then_with(|| a.id.cmp(&b.id)));
        let mut seen = HashSet::new();
        notebooks.retain(|nb| seen.insert(nb.id.clone()));
        for nb in &mut notebooks {
            nb.relink();
        }

        let code_cells: Vec<_> = notebooks.iter().flat_map(|nb| nb.code_cells()).collect();
        let identifiers: BTreeMap<CellId, IdentifierSet> = code_cells
            .par_iter()
            .map(|c| (c.id(), extract_identifiers(&c.source)))
            .collect();
        let pairs: Vec<CodeDescriptorPair> = code_cells
            .par_iter()
            .filter(|c| !c.is_blank())
            .map(|c| generate_descriptor(c, external))
            .collect::<Result<_>>()?;

        let descriptors: Vec<&str> = pairs.iter().map(|p| p.descriptor.as_str()).collect();
        let vocab = fit(&descriptors, &config.vectorizer)?;
        let vectorizer = Vectorizer::new(vocab, config.vectorizer.clone());
        let vectors: Vec<DescriptorVector> =
            descriptors.par_iter().map(|d| vectorizer.vectorize(d)).collect();

        Ok(Self::assemble(config, notebooks, identifiers, pairs, vectorizer, vectors))
    }

    fn assemble(
        config: EngineConfig,
        notebooks: Vec<RawNotebook>,
        identifiers: BTreeMap<CellId, IdentifierSet>,
        pairs: Vec<CodeDescriptorPair>,
        vectorizer: Vectorizer,
        vectors: Vec<DescriptorVector>,
    ) -> Self {
        let sources: Vec<(CellId, &str)> =
            pairs.iter().map(|p| (p.cell_id.clone(), p.code.as_str())).collect();
        let keyword = Bm25Index::build(&sources, config.bm25);
        Self::with_keyword_index(config, notebooks, identifiers, pairs, vectorizer, vectors, keyword)
    }

    fn with_keyword_index(
        config: EngineConfig,
        notebooks: Vec<RawNotebook>,
        identifiers: BTreeMap<CellId, IdentifierSet>,
        pairs: Vec<CodeDescriptorPair>,
        vectorizer: Vectorizer,
        vectors: Vec<DescriptorVector>,
        keyword: Bm25Index,
    ) -> Self {
        let notebook_pos = notebooks.iter().enumerate().map(|(i, nb)| (nb.id.clone(), i)).collect();
        let pair_pos = pairs.iter().enumerate().map(|(i, p)| (p.cell_id.clone(), i)).collect();
        let semantic =
            SemanticIndex::new(pairs.iter().map(|p| p.cell_id.clone()).zip(vectors).collect());
        Self {
            config,
            notebooks,
            notebook_pos,
            identifiers,
            pairs,
            pair_pos,
            vectorizer,
            semantic,
            keyword,
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn notebooks(&self) -> &[RawNotebook] {
        &self.notebooks
    }

    pub fn pairs(&self) -> &[CodeDescriptorPair] {
        &self.pairs
    }

    pub fn vectorizer(&self) -> &Vectorizer {
        &self.vectorizer
    }

    pub fn semantic_index(&self) -> &SemanticIndex {
        &self.semantic
    }

    pub fn keyword_index(&self) -> &Bm25Index {
        &self.keyword
    }

    pub fn notebook(&self, id: &str) -> Option<&RawNotebook> {
        self.notebook_pos.get(id).map(|&i| &self.notebooks[i])
    }

    pub fn identifiers(&self, id: &CellId) -> Option<&IdentifierSet> {
        self.identifiers.get(id)
    }

    pub fn vector(&self, id: &CellId) -> Option<&DescriptorVector> {
        self.pair_pos.get(id).and_then(|&i| self.semantic.vector_at(i))
    }

    pub fn stats(&self) -> IndexStats {
        let mut stats = IndexStats { notebooks: self.notebooks.len(), ..Default::default() };
        for cell in self.notebooks.iter().flat_map(|nb| &nb.cells) {
            stats.cells += 1;
            match cell.kind {
                CellKind::Code => {
                    stats.code_cells += 1;
                    stats.blank_code_cells += usize::from(cell.is_blank());
                }
                CellKind::Markdown => stats.markdown_cells += 1,
            }
        }
        stats.indexed_cells = self.pairs.len();
        for p in &self.pairs {
            *stats.origins.entry(p.origin).or_insert(0) += 1;
        }
        stats
    }

    pub fn search(&self, req: &SearchRequest) -> Result<SearchResponse> {
        if req.k == 0 {
            return Err(Error::InvalidRequest("k must be at least 1".into()));
        }
        let parsed = parse_query(&req.query)?;
        let mut flags = BTreeSet::new();
        let hits = match parsed.mode {
            SearchMode::Semantic => {
                let query = self.vectorizer.vectorize(&parsed.terms);
                let top = self.semantic.top_k(&query, req.k, req.dedup)?;
                if top.out_of_vocabulary {
                    flags.insert(FLAG_OUT_OF_VOCABULARY.to_string());
                }
                top.hits
            }
            SearchMode::Keyword => take_top(self.keyword.rank_all(&parsed.terms)?, req.k, req.dedup),
        };

        let mut notebooks: Vec<NotebookEntry> = Vec::new();
        let mut items = Vec::with_capacity(hits.len());
        for (i, hit) in hits.into_iter().enumerate() {
            let nb = self
                .notebook(&hit.cell_id.notebook_id)
                .ok_or_else(|| Error::NotFound(hit.cell_id.notebook_id.clone()))?;
            if !notebooks.iter().any(|n| n.notebook_id == nb.id) {
                notebooks.push(NotebookEntry {
                    notebook_id: nb.id.clone(),
                    path: nb.path.clone(),
                    color_ordinal: color_ordinal(notebooks.len()),
                });
            }
            let source = nb.cells.get(hit.cell_id.index).map_or("", |c| c.source.as_str());
            items.push(SearchItem {
                rank: i + 1,
                notebook_id: nb.id.clone(),
                score: hit.score,
                snippet: snippet(source),
                identifiers: self.identifiers.get(&hit.cell_id).cloned().unwrap_or_default(),
                cell_id: hit.cell_id,
            });
        }

        let ids: Vec<&str> = notebooks.iter().map(|n| n.notebook_id.as_str()).collect();
        let grid = self.align(&ids)?;
        Ok(SearchResponse { mode: parsed.mode, items, notebooks, grid, flags })
    }

    /// Indexed cells of a notebook as an alignment sequence.
    pub fn cell_sequence(&self, notebook_id: &str) -> Result<CellSequence> {
        let nb = self
            .notebook(notebook_id)
            .ok_or_else(|| Error::NotFound(format!("notebook {notebook_id}")))?;
        let entries = nb
            .code_cells()
            .filter_map(|c| self.vector(&c.id()).map(|v| (c.index, v.clone())))
            .collect();
        Ok(CellSequence { notebook_id: nb.id.clone(), entries })
    }

    /// Alignment grid over the given notebooks, in the given order.
    pub fn align(&self, notebook_ids: &[&str]) -> Result<AlignmentGrid> {
        let sequences =
            notebook_ids.iter().map(|id| self.cell_sequence(id)).collect::<Result<Vec<_>>>()?;
        Ok(progressive_align(&sequences, &self.config.alignment))
    }

    pub fn notebook_detail(&self, notebook_id: &str, anchor_index: usize) -> Result<NotebookDetail> {
        let nb = self
            .notebook(notebook_id)
            .ok_or_else(|| Error::NotFound(format!("notebook {notebook_id}")))?;
        let anchor = nb
            .cells
            .get(anchor_index)
            .filter(|c| c.kind == CellKind::Code)
            .ok_or_else(|| Error::NotFound(format!("code cell {notebook_id}:{anchor_index}")))?;
        let anchor_id = anchor.id();
        let empty = IdentifierSet::default();
        let anchor_ids = self.identifiers.get(&anchor_id).unwrap_or(&empty);
        let anchor_vec = self.vector(&anchor_id);

        let cells = nb
            .cells
            .iter()
            .map(|cell| {
                let id = cell.id();
                let identifiers = self.identifiers.get(&id).cloned().unwrap_or_default();
                let similarity_to_anchor = if cell.index == anchor_index {
                    1.0
                } else {
                    match (anchor_vec, self.vector(&id)) {
                        (Some(a), Some(v)) => cosine(a, v),
                        _ => 0.0,
                    }
                };
                DetailCell {
                    index: cell.index,
                    kind: cell.kind,
                    source: cell.source.clone(),
                    similarity_to_anchor,
                    shared_with_anchor: shared_identifiers(anchor_ids, &identifiers),
                    identifiers,
                }
            })
            .collect();
        Ok(NotebookDetail {
            notebook_id: nb.id.clone(),
            path: nb.path.clone(),
            anchor_index,
            cells,
        })
    }

    /// Code cells of the notebook sharing more than `n` identifiers with the anchor.
    pub fn links(&self, notebook_id: &str, anchor_index: usize, n: usize) -> Result<Vec<usize>> {
        let nb = self
            .notebook(notebook_id)
            .ok_or_else(|| Error::NotFound(format!("notebook {notebook_id}")))?;
        let cells: Vec<(usize, &IdentifierSet)> = nb
            .code_cells()
            .filter_map(|c| self.identifiers.get(&c.id()).map(|ids| (c.index, ids)))
            .collect();
        overlap_links(LinkQuery { anchor_index, n }, &cells).map_err(|e| match e {
            Error::AnchorNotFound(i) => Error::NotFound(format!("code cell {notebook_id}:{i}")),
            other => other,
        })
    }
}
