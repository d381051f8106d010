//! Search engine for collections of computational notebooks.
//!
//! The pipeline runs in one direction:
//!
//! 1. [`corpus`] parses `.ipynb` documents into cells and harvests comments.
//! 2. [`analysis`] extracts the variables and functions each cell uses.
//! 3. [`descriptor`] pairs every code cell with a one-line descriptor
//!    (harvested, externally supplied, or synthesized).
//! 4. [`semantic`] embeds descriptors; [`keyword`] indexes raw code with BM25.
//! 5. [`service`] answers queries, aligns the result notebooks with
//!    [`alignment`], and serves everything over HTTP.

pub mod alignment;
pub mod analysis;
pub mod bleu;
pub mod corpus;
pub mod descriptor;
pub mod error;
pub mod keyword;
mod lexer;
pub mod semantic;
pub mod service;

pub use alignment::{AlignmentGrid, AlignmentParams, CellSequence};
pub use analysis::IdentifierSet;
pub use corpus::{Cell, CellId, CellKind, RawNotebook};
pub use descriptor::{CodeDescriptorPair, Origin};
pub use error::{Error, Result};
pub use semantic::{DescriptorVector, VectorizerConfig};
pub use service::{Engine, EngineConfig, SearchRequest, SearchResponse};
