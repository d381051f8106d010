//! On-disk index layout.
//!
//! ```text
//! manifest.json      format version, vectorizer/BM25/alignment settings, file checksums
//! notebooks.jsonl    one parsed notebook per line
//! identifiers.jsonl  {"cell_id","variables","functions"} per code cell
//! pairs.jsonl        {"cell_id","descriptor","origin"} per indexed cell
//! vocabulary.json    term → (index, document frequency), document count
//! vectors.bin        "NBSV", u32 count, u32 dim, count×dim f32 (LE) in pairs.jsonl order
//! bm25.json          keyword index
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Engine, EngineConfig, IndexStats};
use crate::analysis::IdentifierSet;
use crate::corpus::{CellId, RawNotebook};
use crate::descriptor::{CodeDescriptorPair, Origin};
use crate::error::{Error, Result};
use crate::keyword::Bm25Index;
use crate::semantic::{stopwords_hash, DescriptorVector, Vectorizer, Vocabulary};

pub const INDEX_FORMAT_VERSION: u32 = 1;
pub const VECTORS_MAGIC: &[u8; 4] = b"NBSV";

const MANIFEST: &str = "manifest.json";
const NOTEBOOKS: &str = "notebooks.jsonl";
const IDENTIFIERS: &str = "identifiers.jsonl";
const PAIRS: &str = "pairs.jsonl";
const VOCABULARY: &str = "vocabulary.json";
const VECTORS: &str = "vectors.bin";
const BM25: &str = "bm25.json";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    dim: usize,
    seed: u64,
    vocabulary_size: usize,
    stopwords_sha256: String,
    config: EngineConfig,
    stats: IndexStats,
    /// file name → hex SHA-256 of its bytes
    files: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct IdentifierRecord {
    cell_id: CellId,
    #[serde(flatten)]
    identifiers: IdentifierSet,
}

#[derive(Serialize, Deserialize)]
struct PairRecord {
    cell_id: CellId,
    descriptor: String,
    origin: Origin,
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, &item).map_err(|e| Error::json("serializing index", e))?;
        out.push(b'\n');
    }
    Ok(out)
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    serde_json::to_vec(value).map_err(|e| Error::json("serializing index", e))
}

fn parse_jsonl<T: for<'de> Deserialize<'de>>(name: &str, bytes: &[u8]) -> Result<Vec<T>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::CorruptIndex(format!("{name} is not UTF-8")))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::CorruptIndex(format!("{name} line {}: {e}", i + 1)))
        })
        .collect()
}

fn parse_json<T: for<'de> Deserialize<'de>>(name: &str, bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| Error::CorruptIndex(format!("{name}: {e}")))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn encode_vectors<'a>(
    dim: usize,
    vectors: impl ExactSizeIterator<Item = &'a DescriptorVector>,
) -> Vec<u8> {
    let count = vectors.len();
    let mut out = Vec::with_capacity(12 + count * dim * 4);
    out.extend_from_slice(VECTORS_MAGIC);
    out.extend_from_slice(&(count as u32).to_le_bytes());
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    for v in vectors {
        for x in &v.0 {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

fn decode_vectors(bytes: &[u8]) -> Result<(usize, Vec<DescriptorVector>)> {
    if bytes.len() < 12 || &bytes[..4] != VECTORS_MAGIC {
        return Err(Error::CorruptIndex("vectors.bin has a bad header".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (count, dim) = (word(4), word(8));
    let expected = count
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(12))
        .ok_or_else(|| Error::CorruptIndex("vectors.bin header overflows".into()))?;
    if bytes.len() != expected {
        return Err(Error::CorruptIndex(format!(
            "vectors.bin is {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let vectors = bytes[12..]
        .chunks_exact(dim.max(1) * 4)
        .take(count)
        .map(|chunk| {
            DescriptorVector(
                chunk.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect(),
            )
        })
        .collect();
    Ok((dim, vectors))
}

impl Engine {
    /// Writes the index files into `dir`, creating it if needed. Output bytes
    /// depend only on the engine state.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;

        let identifiers = self
            .identifiers
            .iter()
            .map(|(id, ids)| IdentifierRecord { cell_id: id.clone(), identifiers: ids.clone() });
        let pairs = self.pairs.iter().map(|p| PairRecord {
            cell_id: p.cell_id.clone(),
            descriptor: p.descriptor.clone(),
            origin: p.origin,
        });
        let dim = self.config.vectorizer.dim;
        let vectors: Vec<&DescriptorVector> = self.semantic.entries().map(|(_, v)| v).collect();

        let files: Vec<(&str, Vec<u8>)> = vec![
            (NOTEBOOKS, jsonl(&self.notebooks)?),
            (IDENTIFIERS, jsonl(identifiers)?),
            (PAIRS, jsonl(pairs)?),
            (VOCABULARY, json(self.vectorizer.vocabulary())?),
            (VECTORS, encode_vectors(dim, vectors.into_iter())),
            (BM25, json(&self.keyword)?),
        ];

        let mut checksums = BTreeMap::new();
        for (name, bytes) in &files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
            checksums.insert(name.to_string(), sha256_hex(bytes));
        }
        let manifest = Manifest {
            format_version: INDEX_FORMAT_VERSION,
            dim,
            seed: self.config.vectorizer.seed,
            vocabulary_size: self.vectorizer.vocabulary().len(),
            stopwords_sha256: stopwords_hash(),
            config: self.config.clone(),
            stats: self.stats(),
            files: checksums,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)
            .map_err(|e| Error::json("serializing manifest", e))?;
        bytes.push(b'\n');
        let path = dir.join(MANIFEST);
        fs::write(&path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
        };
        let manifest_bytes = read(MANIFEST)?;
        let raw: serde_json::Value = parse_json(MANIFEST, &manifest_bytes)?;
        let found = raw
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::CorruptIndex("manifest has no format_version".into()))?;
        if found != u64::from(INDEX_FORMAT_VERSION) {
            return Err(Error::VersionMismatch {
                found: u32::try_from(found).unwrap_or(u32::MAX),
                expected: INDEX_FORMAT_VERSION,
            });
        }
        let manifest: Manifest = parse_json(MANIFEST, &manifest_bytes)?;
        if manifest.stopwords_sha256 != stopwords_hash() {
            return Err(Error::CorruptIndex("index was built with a different stopword list".into()));
        }

        let mut contents: HashMap<&str, Vec<u8>> = HashMap::new();
        for name in [NOTEBOOKS, IDENTIFIERS, PAIRS, VOCABULARY, VECTORS, BM25] {
            let bytes = read(name)?;
            let expected = manifest
                .files
                .get(name)
                .ok_or_else(|| Error::CorruptIndex(format!("manifest lists no checksum for {name}")))?;
            if &sha256_hex(&bytes) != expected {
                return Err(Error::CorruptIndex(format!("checksum mismatch for {name}")));
            }
            contents.insert(name, bytes);
        }

        let mut notebooks: Vec<RawNotebook> = parse_jsonl(NOTEBOOKS, &contents[NOTEBOOKS])?;
        for nb in &mut notebooks {
            nb.relink();
        }
        let identifiers: BTreeMap<CellId, IdentifierSet> =
            parse_jsonl::<IdentifierRecord>(IDENTIFIERS, &contents[IDENTIFIERS])?
                .into_iter()
                .map(|r| (r.cell_id, r.identifiers))
                .collect();
        let sources: HashMap<CellId, &str> = notebooks
            .iter()
            .flat_map(|nb| &nb.cells)
            .map(|c| (c.id(), c.source.as_str()))
            .collect();
        let pairs = parse_jsonl::<PairRecord>(PAIRS, &contents[PAIRS])?
            .into_iter()
            .map(|r| {
                let code = sources.get(&r.cell_id).ok_or_else(|| {
                    Error::CorruptIndex(format!("pair {} refers to an unknown cell", r.cell_id))
                })?;
                Ok(CodeDescriptorPair {
                    code: code.to_string(),
                    cell_id: r.cell_id,
                    descriptor: r.descriptor,
                    origin: r.origin,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let vocab: Vocabulary = parse_json(VOCABULARY, &contents[VOCABULARY])?;
        if vocab.len() != manifest.vocabulary_size {
            return Err(Error::CorruptIndex("vocabulary size disagrees with manifest".into()));
        }
        let (dim, vectors) = decode_vectors(&contents[VECTORS])?;
        if dim != manifest.dim || dim != manifest.config.vectorizer.dim {
            return Err(Error::CorruptIndex("vector dimension disagrees with manifest".into()));
        }
        if vectors.len() != pairs.len() {
            return Err(Error::CorruptIndex("vector count disagrees with pairs".into()));
        }
        let mut keyword: Bm25Index = parse_json(BM25, &contents[BM25])?;
        keyword.validate()?;

        let vectorizer = Vectorizer::new(vocab, manifest.config.vectorizer.clone());
        Ok(Engine::with_keyword_index(
            manifest.config,
            notebooks,
            identifiers,
            pairs,
            vectorizer,
            vectors,
            keyword,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_file_layout() {
        let vs = [DescriptorVector(vec![1.0, -0.5]), DescriptorVector(vec![0.0, 2.0])];
        let bytes = encode_vectors(2, vs.iter());
        assert_eq!(&bytes[..4], b"NBSV");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(bytes.len(), 12 + 2 * 2 * 4);
        assert_eq!(f32::from_le_bytes(bytes[16..20].try_into().unwrap()), -0.5);
        let (dim, back) = decode_vectors(&bytes).unwrap();
        assert_eq!(dim, 2);
        assert_eq!(back, vs.to_vec());
        assert!(matches!(decode_vectors(&bytes[..bytes.len() - 1]), Err(Error::CorruptIndex(_))));
        assert!(matches!(decode_vectors(b"XXXX\0\0\0\0\0\0\0\0"), Err(Error::CorruptIndex(_))));
    }
}
