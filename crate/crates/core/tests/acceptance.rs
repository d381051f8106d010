//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Every expected value is either a hand-computed constant or comes from an
//! oracle written here, independent of the library code under test.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nbsearch_core::alignment::{align_by_score, pairwise_align, Profile, Step};
use nbsearch_core::analysis::{overlap_links, LinkQuery};
use nbsearch_core::bleu::bleu;
use nbsearch_core::corpus::load_corpus;
use nbsearch_core::keyword::{Bm25Index, Bm25Params};
use nbsearch_core::service::http::{router, AppState};
use nbsearch_core::{
    AlignmentParams, CellId, CellSequence, DescriptorVector, Engine, EngineConfig, IdentifierSet,
    Origin, SearchRequest,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

// ---------------------------------------------------------------------------
// Oracles

/// Cosine in f64 straight from the stored f32 components.
fn oracle_cosine(a: &DescriptorVector, b: &DescriptorVector) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.0.iter().zip(&b.0) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// Best total over every global alignment of `n` against `m`, enumerated
/// recursively. Scores accumulate from the start of the alignment.
fn oracle_alignment_max(n: usize, m: usize, s: &[Vec<f64>], gap: f64) -> f64 {
    fn go(i: usize, j: usize, acc: f64, n: usize, m: usize, s: &[Vec<f64>], gap: f64) -> f64 {
        if i == n && j == m {
            return acc;
        }
        let mut best = f64::NEG_INFINITY;
        if i < n && j < m {
            best = best.max(go(i + 1, j + 1, acc + s[i][j], n, m, s, gap));
        }
        if i < n {
            best = best.max(go(i + 1, j, acc - gap, n, m, s, gap));
        }
        if j < m {
            best = best.max(go(i, j + 1, acc - gap, n, m, s, gap));
        }
        best
    }
    go(0, 0, 0.0, n, m, s, gap)
}

/// BLEU by direct counting: clipped n-gram matches over orders
/// `1..=min(max_n, |candidate|)`, uniform geometric mean, brevity penalty.
fn oracle_bleu(candidate: &str, reference: &str, max_n: usize) -> (Vec<f64>, f64) {
    let c: Vec<String> = candidate.split_whitespace().map(str::to_lowercase).collect();
    let r: Vec<String> = reference.split_whitespace().map(str::to_lowercase).collect();
    if c.is_empty() {
        return (vec![0.0; max_n], 0.0);
    }
    let count = |toks: &[String], gram: &[String]| {
        (0..toks.len().saturating_sub(gram.len() - 1))
            .filter(|&k| toks.len() >= gram.len() && toks[k..k + gram.len()] == *gram)
            .count()
    };
    let mut precisions = Vec::new();
    for n in 1..=max_n.min(c.len()) {
        let mut distinct: Vec<&[String]> = Vec::new();
        for k in 0..=c.len() - n {
            let gram = &c[k..k + n];
            if !distinct.contains(&gram) {
                distinct.push(gram);
            }
        }
        let matched: usize = distinct.iter().map(|g| count(&c, g).min(count(&r, g))).sum();
        precisions.push(matched as f64 / (c.len() - n + 1) as f64);
    }
    let bp = if c.len() > r.len() { 1.0 } else { (1.0 - r.len() as f64 / c.len() as f64).exp() };
    let product: f64 = precisions.iter().product();
    let score = if product == 0.0 { 0.0 } else { bp * product.powf(1.0 / precisions.len() as f64) };
    (precisions, score)
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> DescriptorVector {
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    DescriptorVector(v.iter().map(|x| (x / norm) as f32).collect())
}

fn hash_dir(dir: &Path) -> String {
    let mut names: Vec<_> = std::fs::read_dir(dir)
        .expect("index dir")
        .map(|e| e.expect("dir entry").file_name())
        .collect();
    names.sort();
    let mut h = Sha256::new();
    for name in names {
        h.update(name.as_encoded_bytes());
        h.update(std::fs::read(dir.join(&name)).expect("index file"));
    }
    hex::encode(h.finalize())
}

// ---------------------------------------------------------------------------
// Criteria

fn bm25_oracle() -> Outcome {
    let docs = [
        (CellId::new("d", 1), "plot data"),
        (CellId::new("d", 2), "plot plot chart"),
        (CellId::new("d", 3), "read file"),
    ];
    let ix = Bm25Index::build(&docs, Bm25Params::default());
    let hits = ix.rank_all("plot").map_err(|e| e.to_string())?;
    let got: Vec<(String, f64)> = hits.iter().map(|h| (h.cell_id.to_string(), h.score)).collect();
    ensure!(got.len() == 2, "expected d2, d1 only, got {got:?}");
    ensure!(got[0].0 == "d:2" && got[1].0 == "d:1", "ranking {got:?}");
    ensure!((got[0].1 - 0.5982).abs() <= 1e-4, "d2 scored {}", got[0].1);
    ensure!((got[1].1 - 0.4992).abs() <= 1e-4, "d1 scored {}", got[1].1);
    Ok(format!("d2={:.4} d1={:.4}", got[0].1, got[1].1))
}

fn pairwise_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa11);
    let params = AlignmentParams::default();
    for case in 0..100 {
        let n = rng.random_range(0..=5);
        let m = rng.random_range(0..=5);
        let a: Vec<DescriptorVector> = (0..n).map(|_| random_unit(&mut rng, 6)).collect();
        let b: Vec<DescriptorVector> = (0..m).map(|_| random_unit(&mut rng, 6)).collect();
        let gap = if case % 2 == 0 { params.gap_penalty } else { rng.random_range(0.0..0.4) };
        let s: Vec<Vec<f64>> =
            a.iter().map(|x| b.iter().map(|y| oracle_cosine(x, y) - params.tau).collect()).collect();

        let dp = align_by_score(n, m, |i, j| s[i][j], gap);
        let best = oracle_alignment_max(n, m, &s, gap);
        ensure!(dp.total == best, "case {case}: dp {} vs exhaustive {best}", dp.total);

        // The traceback must be a valid alignment scoring exactly the total.
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        for step in &dp.steps {
            match *step {
                Step::Match(x, y) if x == i && y == j => {
                    acc += s[x][y];
                    i += 1;
                    j += 1;
                }
                Step::GapInB(x) if x == i => {
                    acc -= gap;
                    i += 1;
                }
                Step::GapInA(y) if y == j => {
                    acc -= gap;
                    j += 1;
                }
                other => return Err(format!("case {case}: out-of-order step {other:?}")),
            }
        }
        ensure!(i == n && j == m, "case {case}: traceback stops at ({i},{j})");
        ensure!(acc == dp.total, "case {case}: steps sum to {acc}, total {}", dp.total);

        // Library entry point on real vectors, against the same enumeration.
        let seq = |id: &str, v: &[DescriptorVector]| CellSequence {
            notebook_id: id.into(),
            entries: v.iter().cloned().enumerate().collect(),
        };
        let lib = pairwise_align(&Profile::from_sequence(&seq("a", &a)), &seq("b", &b), &params);
        let best0 = oracle_alignment_max(n, m, &s, params.gap_penalty);
        ensure!(
            (lib.total - best0).abs() <= 1e-12,
            "case {case}: pairwise_align {} vs exhaustive {best0}",
            lib.total
        );
    }
    Ok("100 instances, exact".into())
}

fn msa_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3a5);
    let mut rows_total = 0;
    for corpus in 0..50 {
        let centers: Vec<DescriptorVector> = (0..4).map(|_| random_unit(&mut rng, 16)).collect();
        let notebooks = rng.random_range(1..=8);
        let seqs: Vec<CellSequence> = (0..notebooks)
            .map(|nb| {
                let cells = rng.random_range(0..=12);
                let mut index = 0;
                let entries = (0..cells)
                    .map(|_| {
                        index += rng.random_range(1..=3);
                        let c = centers.choose(&mut rng).unwrap();
                        let noise = random_unit(&mut rng, 16);
                        let v = c.0.iter().zip(&noise.0).map(|(x, y)| x + 0.3 * y).collect();
                        (index, DescriptorVector(v))
                    })
                    .collect();
                CellSequence { notebook_id: format!("nb{nb}"), entries }
            })
            .collect();
        let grid = nbsearch_core::alignment::progressive_align(&seqs, &AlignmentParams::default());
        rows_total += grid.rows.len();

        let order: Vec<&str> = seqs.iter().map(|s| s.notebook_id.as_str()).collect();
        ensure!(grid.column_order == order, "corpus {corpus}: column order {:?}", grid.column_order);
        for (r, row) in grid.rows.iter().enumerate() {
            ensure!(row.len() == seqs.len(), "corpus {corpus}: row {r} width {}", row.len());
            ensure!(row.iter().any(Option::is_some), "corpus {corpus}: row {r} is all gaps");
        }
        for (c, seq) in seqs.iter().enumerate() {
            let placed: Vec<usize> = grid.rows.iter().filter_map(|row| row[c]).collect();
            let original: Vec<usize> = seq.entries.iter().map(|(i, _)| *i).collect();
            // Equal sequences imply order preservation and each cell placed once.
            ensure!(placed == original, "corpus {corpus}: column {c} is {placed:?}, cells {original:?}");
        }
    }
    Ok(format!("50 corpora, {rows_total} rows checked"))
}

fn self_retrieval() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    let vocab = ["load", "plot", "model", "data", "chart", "train", "merge", "clean"];
    let mut notebooks = Vec::new();
    for n in 0..20 {
        let sources: Vec<String> = (0..5)
            .map(|c| {
                let shared: Vec<&str> = (0..3).map(|_| *vocab.choose(&mut rng).unwrap()).collect();
                format!("# {} {}\nresult = compute(frame, {c})", common::unique_word(n * 5 + c), shared.join(" "))
            })
            .collect();
        let cells: Vec<(&str, &str)> = sources.iter().map(|s| ("code", s.as_str())).collect();
        notebooks.push(common::notebook(&format!("self/nb{n:02}.ipynb"), &cells));
    }
    let engine = Engine::build(notebooks, None, EngineConfig::default()).map_err(|e| e.to_string())?;
    ensure!(engine.pairs().len() == 100, "indexed {} cells", engine.pairs().len());

    let stored: Vec<(CellId, DescriptorVector)> = engine
        .pairs()
        .iter()
        .map(|p| (p.cell_id.clone(), engine.vector(&p.cell_id).cloned().expect("vector")))
        .collect();
    let mut worst: f64 = 0.0;
    for pair in engine.pairs() {
        let resp = engine
            .search(&SearchRequest { query: pair.descriptor.clone(), k: 3, dedup: false })
            .map_err(|e| e.to_string())?;
        let top = resp.items.first().ok_or("no results")?;
        ensure!(top.cell_id == pair.cell_id, "{} retrieved {}", pair.cell_id, top.cell_id);
        ensure!((top.score - 1.0).abs() <= 1e-9, "{} self score {}", pair.cell_id, top.score);

        let q = engine.vectorizer().vectorize(&pair.descriptor);
        let mut oracle: Vec<(f64, &CellId)> =
            stored.iter().map(|(id, v)| (oracle_cosine(&q, v), id)).collect();
        oracle.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        ensure!(oracle[0].1 == &pair.cell_id, "oracle ranks {} first", oracle[0].1);
        ensure!((oracle[0].0 - 1.0).abs() <= 1e-9, "oracle self score {}", oracle[0].0);
        for (item, (score, id)) in resp.items.iter().zip(&oracle) {
            ensure!(&item.cell_id == *id, "rank {}: {} vs oracle {}", item.rank, item.cell_id, id);
            worst = worst.max((item.score - score).abs());
        }
    }
    ensure!(worst <= 1e-9, "engine and oracle scores differ by {worst:e}");
    Ok(format!("100/100 at rank 1, max |engine-oracle| {worst:.1e}"))
}

fn dedup_contract() -> Outcome {
    let engine = Engine::build(common::clustered_corpus(30, 6, 0xdd), None, EngineConfig::default())
        .map_err(|e| e.to_string())?;
    let stored: Vec<(CellId, DescriptorVector)> = engine
        .pairs()
        .iter()
        .map(|p| (p.cell_id.clone(), engine.vector(&p.cell_id).cloned().expect("vector")))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xd0d);
    let all_words: Vec<&str> = common::TOPICS.iter().flat_map(|t| t.iter().copied()).collect();
    for q in 0..20 {
        let words: Vec<&str> = (0..rng.random_range(1..=3))
            .map(|_| *all_words.choose(&mut rng).unwrap())
            .collect();
        let query = words.join(" ");
        let k = rng.random_range(3..=12);
        let resp = engine
            .search(&SearchRequest { query: query.clone(), k, dedup: true })
            .map_err(|e| e.to_string())?;
        ensure!(!resp.items.is_empty() && resp.items.len() <= k, "query {q}: {} items", resp.items.len());
        let ids: BTreeSet<&str> = resp.items.iter().map(|i| i.notebook_id.as_str()).collect();
        ensure!(ids.len() == resp.items.len(), "query {q} {query:?}: repeated notebook");

        // Oracle: each notebook's best cell, best notebooks first.
        let qv = engine.vectorizer().vectorize(&query);
        let mut best: BTreeMap<&str, f64> = BTreeMap::new();
        for (id, v) in &stored {
            let s = oracle_cosine(&qv, v);
            let e = best.entry(id.notebook_id.as_str()).or_insert(f64::NEG_INFINITY);
            *e = e.max(s);
        }
        let mut expected: Vec<f64> = best.into_values().collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        for (item, want) in resp.items.iter().zip(&expected) {
            ensure!((item.score - want).abs() <= 1e-9, "query {q}: rank {} score {} vs {want}", item.rank, item.score);
        }
    }
    Ok("20 queries, notebook ids distinct".into())
}

fn bleu_correctness() -> Outcome {
    let same = bleu("load the training data into a frame", "load the training data into a frame", 4);
    ensure!(same.cumulative == 1.0, "identical sentences scored {}", same.cumulative);
    let clip = bleu("the the the the", "the cat is on the mat", 4);
    ensure!(clip.per_n.get(&1) == Some(&0.5), "clipped unigram precision {:?}", clip.per_n.get(&1));

    let mut rng = ChaCha8Rng::seed_from_u64(0xb1e);
    let words = ["the", "data", "plot", "model", "load", "a", "train", "of"];
    let sentence = |rng: &mut ChaCha8Rng| {
        let len = rng.random_range(1..=12);
        (0..len).map(|_| *words.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
    };
    let mut worst: f64 = 0.0;
    let mut nonzero = 0;
    for case in 0..20 {
        let r = sentence(&mut rng);
        // Half the candidates are noisy copies of the reference, so higher
        // orders match too.
        let c = if case % 2 == 0 {
            sentence(&mut rng)
        } else {
            let len = rng.random_range(1..=12);
            r.split(' ')
                .take(len)
                .map(|w| if rng.random_bool(0.2) { *words.choose(&mut rng).unwrap() } else { w })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let got = bleu(&c, &r, 4);
        let (precisions, score) = oracle_bleu(&c, &r, 4);
        let mine: Vec<f64> = got.per_n.values().copied().collect();
        ensure!(mine.len() == precisions.len(), "case {case}: orders {mine:?} vs {precisions:?}");
        for (a, b) in mine.iter().zip(&precisions) {
            worst = worst.max((a - b).abs());
        }
        worst = worst.max((got.cumulative - score).abs());
        if score > 0.0 {
            nonzero += 1;
        }
    }
    ensure!(worst <= 1e-6, "max deviation from oracle {worst:e}");
    Ok(format!("20 random pairs ({nonzero} non-zero), max deviation {worst:.1e}"))
}

fn link_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11c);
    let names = ["df", "x", "y", "model", "plt", "fit", "np", "data", "read_csv", "train"];
    let mut links_seen = 0;
    for fixture in 0..100 {
        let cells = rng.random_range(1..=10);
        let sets: Vec<(usize, IdentifierSet)> = (0..cells)
            .map(|c| {
                let mut set = IdentifierSet::default();
                for name in names {
                    match rng.random_range(0..4) {
                        0 => {
                            set.variables.insert(name.to_string());
                        }
                        1 => {
                            set.functions.insert(name.to_string());
                        }
                        _ => {}
                    }
                }
                (c * 2, set)
            })
            .collect();
        let refs: Vec<(usize, &IdentifierSet)> = sets.iter().map(|(i, s)| (*i, s)).collect();
        let anchor = refs.choose(&mut rng).unwrap().0;
        let mut prev: Option<BTreeSet<usize>> = None;
        for n in 0..=names.len() {
            let got = overlap_links(LinkQuery { anchor_index: anchor, n }, &refs).map_err(|e| e.to_string())?;
            let got: BTreeSet<usize> = got.into_iter().collect();
            ensure!(!got.contains(&anchor), "fixture {fixture}: anchor linked at n={n}");
            if let Some(p) = &prev {
                ensure!(got.is_subset(p), "fixture {fixture}: links({n}) not within links({})", n - 1);
            }
            links_seen += got.len();
            prev = Some(got);
        }
    }
    ensure!(links_seen > 0, "no fixture produced any link");
    Ok(format!("100 fixtures, {links_seen} links checked"))
}

fn golden_queries() -> Vec<SearchRequest> {
    let mut out = Vec::new();
    let texts = [
        "plot histogram", "train the model", "load csv file", "clean missing values",
        "merge tables", "\"fit\"", "\"csv\"", "\"frame_3\"", "chart axis color", "epochs weights",
        "drop outliers", "join keys", "read rows", "figure", "zzzz qqqq", "\"nothing_matches\"",
        "classifier fit model", "concat index", "fill values", "histogram chart figure",
    ];
    for (i, t) in texts.iter().enumerate() {
        out.push(SearchRequest { query: t.to_string(), k: 1 + i % 7, dedup: i % 3 != 0 });
    }
    out
}

fn persistence_round_trip() -> Outcome {
    let engine = Engine::build(common::clustered_corpus(25, 5, 0x9e5), None, EngineConfig::default())
        .map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    engine.save(dir.path()).map_err(|e| e.to_string())?;
    let loaded = Engine::load(dir.path()).map_err(|e| e.to_string())?;
    let render = |e: &Engine, q: &SearchRequest| match e.search(q) {
        Ok(resp) => serde_json::to_string(&resp).expect("serialize"),
        Err(err) => format!("error: {err}"),
    };
    let mut bytes = 0;
    for (i, q) in golden_queries().iter().enumerate() {
        let (before, after) = (render(&engine, q), render(&loaded, q));
        ensure!(before == after, "golden query {i} {:?} differs after reload", q.query);
        bytes += before.len();
    }
    Ok(format!("20 golden queries identical ({bytes} bytes)"))
}

fn latency() -> Outcome {
    let engine = Engine::build(common::clustered_corpus(500, 20, 0x1a7), None, EngineConfig::default())
        .map_err(|e| e.to_string())?;
    ensure!(engine.pairs().len() == 10_000, "indexed {} cells", engine.pairs().len());
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(|e| e.to_string())?;
        let addr = listener.local_addr().map_err(|e| e.to_string())?;
        let app = router(AppState::new(Some(engine)), None);
        tokio::spawn(async move { axum::serve(listener, app).await });
        let client = reqwest::Client::new();
        let url = format!("http://{addr}/api/search");
        let queries = ["plot histogram chart", "train model epochs", "load csv", "\"missing\"", "merge join tables"];
        let mut times = Vec::new();
        for i in 0..21 {
            let body = serde_json::json!({"query": queries[i % queries.len()], "k": 10});
            let start = Instant::now();
            let resp = client.post(&url).json(&body).send().await.map_err(|e| e.to_string())?;
            let status = resp.status();
            let json: serde_json::Value = resp.json().await.map_err(|e| e.to_string())?;
            times.push(start.elapsed());
            ensure!(status.is_success(), "status {status}: {json}");
            ensure!(json["items"].as_array().is_some_and(|a| !a.is_empty()), "empty result");
        }
        times.sort();
        let (median, max) = (times[times.len() / 2], times[times.len() - 1]);
        ensure!(max < Duration::from_secs(1), "slowest request {max:?}");
        let target = if median < Duration::from_millis(100) { "met" } else { "missed" };
        Ok(format!("21 requests, median {median:.1?}, max {max:.1?}, 100 ms median target {target}"))
    })
}

fn ingest_fidelity() -> Outcome {
    let build = || -> Result<(Engine, String, usize), String> {
        let load = load_corpus(&common::fixture_corpus()).map_err(|e| e.to_string())?;
        let rejected = load.rejected.len();
        let engine = Engine::build(load.notebooks, None, EngineConfig::default()).map_err(|e| e.to_string())?;
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        engine.save(dir.path()).map_err(|e| e.to_string())?;
        Ok((engine, hash_dir(dir.path()), rejected))
    };
    let (engine, first, rejected) = build()?;
    let (_, second, _) = build()?;
    ensure!(rejected == 0, "{rejected} notebooks rejected");

    // Hand count over tests/fixtures/corpus (the checkpoint copy is ignored).
    let s = engine.stats();
    let counts = [
        ("notebooks", s.notebooks, 12),
        ("cells", s.cells, 34),
        ("code", s.code_cells, 28),
        ("markdown", s.markdown_cells, 6),
        ("blank code", s.blank_code_cells, 2),
        ("indexed", s.indexed_cells, 26),
        ("harvested", s.origins.get(&Origin::Harvested).copied().unwrap_or(0), 14),
        ("synthesized", s.origins.get(&Origin::Synthesized).copied().unwrap_or(0), 12),
        ("external", s.origins.get(&Origin::External).copied().unwrap_or(0), 0),
    ];
    for (what, got, want) in counts {
        ensure!(got == want, "{what}: {got}, expected {want}");
    }
    ensure!(first == second, "index hash differs between runs: {first} vs {second}");
    Ok(format!("counts exact, index hash {}", &first[..16]))
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    type Criterion = (&'static str, Option<u64>, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("bm25_oracle", Some(1), bm25_oracle),
        ("pairwise_alignment_optimality", Some(10), pairwise_optimality),
        ("progressive_alignment_invariants", Some(30), msa_invariants),
        ("self_retrieval", Some(10), self_retrieval),
        ("dedup_contract", None, dedup_contract),
        ("bleu_correctness", None, bleu_correctness),
        ("link_monotonicity", None, link_monotonicity),
        ("persistence_round_trip", None, persistence_round_trip),
        ("search_latency", None, latency),
        ("ingest_fidelity", None, ingest_fidelity),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, limit, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(secs)) if elapsed > Duration::from_secs(secs) => {
                Err(format!("took {elapsed:.2?}, limit {secs} s"))
            }
            (o, _) => o,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {name:<34} {:>8.2?}  {detail}", elapsed);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
