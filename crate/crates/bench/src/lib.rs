//! Synthetic notebook corpora for benchmarks.

use nbsearch_core::corpus::parse_notebook;
use nbsearch_core::RawNotebook;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VERBS: &[&str] = &[
    "load", "plot", "train", "evaluate", "clean", "merge", "split", "normalize", "encode",
    "visualize", "predict", "tune", "sample", "aggregate", "filter",
];
const NOUNS: &[&str] = &[
    "data", "model", "histogram", "features", "labels", "classifier", "regression", "columns",
    "dataframe", "matrix", "scores", "images", "text", "weights", "clusters", "outliers",
];
const CALLS: &[&str] = &[
    "pd.read_csv", "plt.hist", "plt.plot", "model.fit", "model.predict", "df.groupby",
    "np.mean", "train_test_split", "sns.heatmap", "df.dropna", "StandardScaler",
];

/// `notebooks` notebooks of `cells_per_notebook` code cells each. About two
/// thirds of the cells carry a descriptive comment.
pub fn synthetic_corpus(notebooks: usize, cells_per_notebook: usize, seed: u64) -> Vec<RawNotebook> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..notebooks)
        .map(|n| {
            let cells: Vec<serde_json::Value> = (0..cells_per_notebook)
                .map(|c| {
                    let call = CALLS.choose(&mut rng).unwrap();
                    let var = format!("v{}_{}", n % 97, c);
                    let mut src = String::new();
                    if rng.random_bool(0.66) {
                        let verb = VERBS.choose(&mut rng).unwrap();
                        let noun = NOUNS.choose(&mut rng).unwrap();
                        let noun2 = NOUNS.choose(&mut rng).unwrap();
                        src.push_str(&format!("# {verb} the {noun} and {noun2}\n"));
                    }
                    src.push_str(&format!("{var} = {call}(x{c}, y)\nprint({var})"));
                    serde_json::json!({"cell_type": "code", "metadata": {}, "source": src})
                })
                .collect();
            let doc = serde_json::json!({"nbformat": 4, "nbformat_minor": 5, "cells": cells});
            parse_notebook(doc.to_string().as_bytes(), &format!("nb{n:05}.ipynb"))
                .expect("synthetic notebook parses")
        })
        .collect()
}
