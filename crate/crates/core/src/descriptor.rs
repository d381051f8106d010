//! Code–descriptor pairs: every indexed code cell gets exactly one
//! single-line natural-language descriptor.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::analysis::identifier_occurrences;
use crate::corpus::{Cell, CellId, CellKind};
use crate::error::{Error, Result};

pub const MAX_SYNTHESIZED_WORDS: usize = 30;
const FALLBACK_DESCRIPTOR: &str = "code";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Harvested,
    Synthesized,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDescriptorPair {
    pub cell_id: CellId,
    #[serde(skip)]
    pub code: String,
    pub descriptor: String,
    pub origin: Origin,
}

/// Descriptors produced elsewhere (e.g. by a trained translation model),
/// keyed by cell id.
pub type ExternalDescriptors = BTreeMap<CellId, String>;

#[derive(Deserialize)]
struct ExternalRecord {
    cell_id: CellId,
    descriptor: String,
}

/// Reads an external descriptor file: JSON lines of `{"cell_id","descriptor"}`.
pub fn parse_external_pairs(text: &str) -> Result<ExternalDescriptors> {
    let mut map = ExternalDescriptors::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ExternalRecord = serde_json::from_str(line)
            .map_err(|e| Error::json(format!("external pairs line {}", lineno + 1), e))?;
        map.insert(rec.cell_id, rec.descriptor);
    }
    Ok(map)
}

fn single_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Harvested comments win, then an external descriptor, then synthesis.
pub fn generate_descriptor(
    cell: &Cell,
    external: Option<&ExternalDescriptors>,
) -> Result<CodeDescriptorPair> {
    if cell.kind != CellKind::Code {
        return Err(Error::ContractViolation(format!("cell {} is not a code cell", cell.id())));
    }
    if cell.is_blank() {
        return Err(Error::EmptyCell(cell.id().to_string()));
    }
    let id = cell.id();
    let harvested = cell.comments.as_deref().map(single_line).filter(|d| !d.is_empty());
    let (descriptor, origin) = if let Some(d) = harvested {
        (d, Origin::Harvested)
    } else if let Some(d) =
        external.and_then(|m| m.get(&id)).map(|d| single_line(d)).filter(|d| !d.is_empty())
    {
        (d, Origin::External)
    } else {
        (synthesize_descriptor(cell), Origin::Synthesized)
    };
    Ok(CodeDescriptorPair { cell_id: id, code: cell.source.clone(), descriptor, origin })
}

/// Splits `snake_case`, `camelCase`, `dotted.paths` and acronyms into
/// lowercase words: `pd.readCSVFile` → `pd read csv file`.
pub fn split_identifier(name: &str) -> Vec<String> {
    let mut words = Vec::new();
    for part in name.split(|c: char| c == '_' || c == '.' || !c.is_alphanumeric()) {
        let chars: Vec<char> = part.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (prev, cur) = (chars[i - 1], chars[i]);
            let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
            let boundary = (prev.is_lowercase() && cur.is_uppercase())
                || (prev.is_uppercase() && cur.is_uppercase() && next_lower)
                || (prev.is_alphabetic() && cur.is_ascii_digit())
                || (prev.is_ascii_digit() && cur.is_alphabetic());
            if boundary {
                words.push(chars[start..i].iter().collect::<String>().to_lowercase());
                start = i;
            }
        }
        if start < chars.len() {
            words.push(chars[start..].iter().collect::<String>().to_lowercase());
        }
    }
    words
}

/// Deterministic descriptor built from the cell's identifiers in source order.
pub fn synthesize_descriptor(cell: &Cell) -> String {
    let mut seen = HashSet::new();
    let words: Vec<String> = identifier_occurrences(&cell.source)
        .into_iter()
        .flat_map(|occ| split_identifier(&occ.name))
        .filter(|w| seen.insert(w.clone()))
        .take(MAX_SYNTHESIZED_WORDS)
        .collect();
    if words.is_empty() {
        FALLBACK_DESCRIPTOR.to_string()
    } else {
        words.join(" ")
    }
}
