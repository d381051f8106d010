use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nbsearch_bench::synthetic_corpus;
use nbsearch_core::alignment::progressive_align;
use nbsearch_core::{Engine, EngineConfig, SearchRequest};

fn engine(cells: usize) -> Engine {
    Engine::build(synthetic_corpus(cells / 20, 20, 42), None, EngineConfig::default())
        .expect("synthetic corpus builds")
}

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    for cells in [1_000, 10_000] {
        let engine = engine(cells);
        group.bench_with_input(BenchmarkId::new("semantic", cells), &engine, |b, e| {
            let req = SearchRequest::new("plot the histogram of features");
            b.iter(|| e.search(black_box(&req)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("keyword", cells), &engine, |b, e| {
            let req = SearchRequest::new("\"plt.hist\"");
            b.iter(|| e.search(black_box(&req)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("top_k_only", cells), &engine, |b, e| {
            let q = e.vectorizer().vectorize("train the model");
            b.iter(|| e.semantic_index().top_k(black_box(&q), 10, true).unwrap())
        });
    }
    group.finish();
}

fn alignment(c: &mut Criterion) {
    let engine = engine(2_000);
    let mut group = c.benchmark_group("progressive_align");
    for notebooks in [2, 5, 10] {
        let seqs: Vec<_> = engine
            .notebooks()
            .iter()
            .take(notebooks)
            .map(|nb| engine.cell_sequence(&nb.id).unwrap())
            .collect();
        group.bench_with_input(BenchmarkId::from_parameter(notebooks), &seqs, |b, s| {
            b.iter(|| progressive_align(black_box(s), &engine.config().alignment))
        });
    }
    group.finish();
}

fn build(c: &mut Criterion) {
    let notebooks = synthetic_corpus(50, 20, 7);
    c.bench_function("build/1000", |b| {
        b.iter(|| Engine::build(notebooks.clone(), None, EngineConfig::default()).unwrap())
    });
}

criterion_group!(benches, search, alignment, build);
criterion_main!(benches);
