//! Notebook parsing, comment harvesting and the commented / uncommented split.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::lexer::{tokenize, Token, TokenKind};

/// Oldest notebook format with a flat top-level `cells` list.
pub const MIN_FORMAT_VERSION: i64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Code,
    Markdown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    #[serde(skip)]
    pub notebook_id: String,
    pub index: usize,
    pub kind: CellKind,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comments: Option<String>,
}

impl Cell {
    pub fn id(&self) -> CellId {
        CellId::new(self.notebook_id.clone(), self.index)
    }

    pub fn is_blank(&self) -> bool {
        self.source.trim().is_empty()
    }
}

/// `<notebook_id>:<index>`. Orders by notebook id, then by numeric index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId {
    pub notebook_id: String,
    pub index: usize,
}

impl CellId {
    pub fn new(notebook_id: impl Into<String>, index: usize) -> Self {
        Self { notebook_id: notebook_id.into(), index }
    }
}

impl std::fmt::Display for CellId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.notebook_id, self.index)
    }
}

impl std::str::FromStr for CellId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (nb, idx) = s
            .rsplit_once(':')
            .ok_or_else(|| Error::InvalidRequest(format!("bad cell id {s:?}")))?;
        let index = idx
            .parse()
            .map_err(|_| Error::InvalidRequest(format!("bad cell index in {s:?}")))?;
        Ok(CellId::new(nb, index))
    }
}

impl Serialize for CellId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CellId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawNotebook {
    pub id: String,
    pub path: String,
    pub format_version: i64,
    pub cells: Vec<Cell>,
}

impl RawNotebook {
    pub fn code_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.kind == CellKind::Code)
    }

    /// Restores the per-cell notebook id, which is not part of the on-disk record.
    pub(crate) fn relink(&mut self) {
        for cell in &mut self.cells {
            cell.notebook_id = self.id.clone();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommentBlock {
    pub lines: Vec<String>,
    pub joined: String,
}

impl CommentBlock {
    fn from_lines(lines: Vec<String>) -> Option<Self> {
        let lines: Vec<String> = lines.into_iter().filter(|l| !l.is_empty()).collect();
        if lines.is_empty() {
            return None;
        }
        let joined = lines.join(" ");
        Some(Self { lines, joined })
    }
}

/// SHA-256 of the file bytes, first 16 hex chars.
pub fn notebook_id(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    hex::encode(digest)[..16].to_string()
}

fn malformed(path: &str, reason: impl Into<String>) -> Error {
    Error::MalformedNotebook { path: path.to_string(), reason: reason.into() }
}

fn source_text(path: &str, value: Option<&Value>) -> Result<String> {
    match value {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Array(parts)) => parts
            .iter()
            .map(|p| p.as_str().ok_or_else(|| malformed(path, "non-string entry in cell source")))
            .collect::<Result<Vec<_>>>()
            .map(|v| v.concat()),
        Some(_) => Err(malformed(path, "cell source is neither a string nor a list")),
        None => Err(malformed(path, "cell has no source")),
    }
}

pub fn parse_notebook(bytes: &[u8], path: &str) -> Result<RawNotebook> {
    let text = std::str::from_utf8(bytes).map_err(|e| malformed(path, format!("not UTF-8: {e}")))?;
    let doc: Value =
        serde_json::from_str(text).map_err(|e| malformed(path, format!("invalid JSON: {e}")))?;
    let obj = doc.as_object().ok_or_else(|| malformed(path, "top level is not an object"))?;
    let format_version = obj
        .get("nbformat")
        .and_then(Value::as_i64)
        .ok_or_else(|| malformed(path, "missing integer nbformat"))?;
    if format_version < MIN_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion { path: path.to_string(), version: format_version });
    }
    let raw_cells = obj
        .get("cells")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed(path, "missing top-level cell list"))?;

    let id = notebook_id(bytes);
    let mut cells = Vec::with_capacity(raw_cells.len());
    for (index, raw) in raw_cells.iter().enumerate() {
        let kind = match raw.get("cell_type").and_then(Value::as_str) {
            Some("code") => CellKind::Code,
            Some(_) => CellKind::Markdown,
            None => return Err(malformed(path, format!("cell {index} has no cell_type"))),
        };
        let source = source_text(path, raw.get("source"))?;
        let comments = match kind {
            CellKind::Code => harvest_source(&source).map(|b| b.joined),
            CellKind::Markdown => None,
        };
        cells.push(Cell { notebook_id: id.clone(), index, kind, source, comments });
    }
    Ok(RawNotebook { id, path: path.to_string(), format_version, cells })
}

/// Notebooks parsed from a directory tree, plus the files that were rejected.
#[derive(Debug, Default)]
pub struct CorpusLoad {
    pub notebooks: Vec<RawNotebook>,
    pub rejected: Vec<(String, Error)>,
}

/// Parses every `.ipynb` under `root` (checkpoint copies excluded). Output is
/// ordered by relative path regardless of parse order.
pub fn load_corpus(root: &Path) -> Result<CorpusLoad> {
    if !root.is_dir() {
        return Err(Error::io(
            format!("reading corpus {}", root.display()),
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let mut files: Vec<(String, std::path::PathBuf)> = WalkDir::new(root)
        .follow_links(true)
        .into_iter()
        .filter_entry(|e| e.file_name() != ".ipynb_checkpoints")
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .filter(|e| e.path().extension().is_some_and(|x| x == "ipynb"))
        .map(|e| {
            let rel = e
                .path()
                .strip_prefix(root)
                .unwrap_or(e.path())
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            (rel, e.into_path())
        })
        .collect();
    files.sort();

    let parsed: Vec<(String, Result<RawNotebook>)> = files
        .into_par_iter()
        .map(|(rel, full)| {
            let res = std::fs::read(&full)
                .map_err(|e| Error::io(format!("reading {}", full.display()), e))
                .and_then(|bytes| parse_notebook(&bytes, &rel));
            (rel, res)
        })
        .collect();

    let mut load = CorpusLoad::default();
    for (rel, res) in parsed {
        match res {
            Ok(nb) => load.notebooks.push(nb),
            Err(e) => load.rejected.push((rel, e)),
        }
    }
    Ok(load)
}

/// Comment text of a code cell, filtered and joined on single spaces.
pub fn harvest_comments(cell: &Cell) -> Result<Option<CommentBlock>> {
    if cell.kind != CellKind::Code {
        return Err(Error::ContractViolation(format!(
            "harvest_comments called on non-code cell {}",
            cell.id()
        )));
    }
    Ok(harvest_source(&cell.source))
}

pub fn harvest_source(source: &str) -> Option<CommentBlock> {
    let tokens = tokenize(source);
    let mut raw_lines: Vec<String> = Vec::new();

    // True when the next significant logical line may hold a docstring: the
    // start of the cell, or right after a `def ...:` header.
    let mut docstring_slot = true;
    for line in tokens.split(|t| t.kind == TokenKind::Newline) {
        let significant: Vec<&Token> =
            line.iter().filter(|t| !matches!(t.kind, TokenKind::Comment { .. })).collect();

        if let [tok] = significant.as_slice() {
            if let (true, TokenKind::Str { body }) = (docstring_slot, &tok.kind) {
                raw_lines.extend(body.lines().map(|l| l.trim().to_string()));
            }
        }
        for tok in line {
            if let TokenKind::Comment { text } = &tok.kind {
                raw_lines.push(text.clone());
            }
        }

        if !significant.is_empty() {
            let starts_def = significant[0].is_name("def")
                || (significant[0].is_name("async")
                    && significant.get(1).is_some_and(|t| t.is_name("def")));
            let ends_colon = significant.last().is_some_and(|t| t.is_op(":"));
            docstring_slot = starts_def && ends_colon;
        }
    }

    let kept = raw_lines
        .into_iter()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty() && filter_descriptor_line(l))
        .collect();
    CommentBlock::from_lines(kept)
}

/// Accepts a comment line as a natural-language descriptor line.
///
/// Rejects lines where fewer than half the whitespace tokens are purely ASCII
/// letters, and lines that look like commented-out code.
pub fn filter_descriptor_line(line: &str) -> bool {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.is_empty() {
        return false;
    }
    let alphabetic =
        tokens.iter().filter(|t| t.chars().all(|c| c.is_ascii_alphabetic())).count();
    if alphabetic * 2 < tokens.len() {
        return false;
    }
    !looks_like_code(line, alphabetic)
}

fn looks_like_code(line: &str, alphabetic_words: usize) -> bool {
    let chars: Vec<char> = line.chars().collect();
    let has_assignment = chars.iter().enumerate().any(|(i, &c)| {
        if c != '=' {
            return false;
        }
        let prev = i.checked_sub(1).map(|p| chars[p]);
        let next = chars.get(i + 1).copied();
        let part_of_eq = prev == Some('=') || next == Some('=');
        let inside_word = prev.is_some_and(char::is_alphanumeric)
            && next.is_some_and(char::is_alphanumeric);
        !part_of_eq && !inside_word
    });
    if has_assignment {
        return true;
    }
    let call_shaped = (line.ends_with(')') || line.ends_with(']'))
        && (line.contains('(') || line.contains('['));
    call_shaped && alphabetic_words < 2
}

/// Partitions code cells into those with harvested comments and those without.
pub fn split_corpus(notebooks: &[RawNotebook]) -> (Vec<Cell>, Vec<Cell>) {
    notebooks
        .iter()
        .flat_map(|nb| nb.code_cells())
        .cloned()
        .partition(|c| c.comments.is_some())
}
