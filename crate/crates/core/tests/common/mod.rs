//! Fixture builders shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use nbsearch_core::corpus::parse_notebook;
use nbsearch_core::RawNotebook;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOPICS: &[&[&str]] = &[
    &["plot", "histogram", "chart", "axis", "color", "figure"],
    &["train", "model", "classifier", "epochs", "fit", "weights"],
    &["load", "csv", "file", "read", "columns", "rows"],
    &["clean", "missing", "values", "drop", "fill", "outliers"],
    &["merge", "join", "tables", "keys", "concat", "index"],
];

pub fn fixture_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus")
}

/// Serialized nbformat 4 document; cells are `(cell_type, source)`.
pub fn notebook_json(cells: &[(&str, &str)]) -> String {
    let cells: Vec<serde_json::Value> = cells
        .iter()
        .map(|(kind, src)| serde_json::json!({"cell_type": kind, "metadata": {}, "source": src}))
        .collect();
    serde_json::json!({"nbformat": 4, "nbformat_minor": 5, "cells": cells}).to_string()
}

pub fn notebook(path: &str, cells: &[(&str, &str)]) -> RawNotebook {
    parse_notebook(notebook_json(cells).as_bytes(), path).expect("fixture parses")
}

/// Notebooks that each stick to one topic, so similar cells cluster by notebook.
/// Every cell carries a harvested comment of 3..=5 topic words.
pub fn clustered_corpus(notebooks: usize, cells: usize, seed: u64) -> Vec<RawNotebook> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..notebooks)
        .map(|n| {
            let topic = TOPICS[n % TOPICS.len()];
            let sources: Vec<String> = (0..cells)
                .map(|c| {
                    let len = rng.random_range(3..=5);
                    let words: Vec<&str> =
                        (0..len).map(|_| *topic.choose(&mut rng).unwrap()).collect();
                    format!("# {}\nstep_{c} = run(frame_{n}, {c})", words.join(" "))
                })
                .collect();
            let cells: Vec<(&str, &str)> = sources.iter().map(|s| ("code", s.as_str())).collect();
            notebook(&format!("topic/nb{n:04}.ipynb"), &cells)
        })
        .collect()
}

/// A letters-only word that is unique for each `i`.
pub fn unique_word(i: usize) -> String {
    let mut word = String::from("tag");
    let mut i = i;
    loop {
        word.push((b'a' + (i % 26) as u8) as char);
        i /= 26;
        if i == 0 {
            break word;
        }
    }
}
