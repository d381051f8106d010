use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use nbsearch_core::bleu::{bleu, summarize};
use nbsearch_core::corpus::load_corpus;
use nbsearch_core::descriptor::parse_external_pairs;
use nbsearch_core::service::http::{router, AppState};
use nbsearch_core::service::{SearchRequest, SearchResponse, FLAG_OUT_OF_VOCABULARY};
use nbsearch_core::{Engine, EngineConfig, Error};
use serde::Deserialize;

pub struct CommandError {
    code: u8,
    inner: anyhow::Error,
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        self.code
    }

    fn usage(inner: impl Into<anyhow::Error>) -> Self {
        Self { code: 1, inner: inner.into() }
    }

    fn data(inner: impl Into<anyhow::Error>) -> Self {
        Self { code: 2, inner: inner.into() }
    }
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.inner)
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        match e {
            Error::EmptyQuery | Error::InvalidRequest(_) => CommandError::usage(e),
            _ => CommandError::data(e),
        }
    }
}

type Result<T = ()> = std::result::Result<T, CommandError>;

fn load_engine(index: &Path) -> Result<Engine> {
    Engine::load(index)
        .with_context(|| format!("loading index {}", index.display()))
        .map_err(CommandError::data)
}

pub fn ingest(corpus: &Path, index: &Path, external_pairs: Option<&Path>) -> Result {
    let load = load_corpus(corpus)?;
    for (path, err) in &load.rejected {
        println!("skipped {path}: {err}");
    }
    if load.notebooks.is_empty() {
        return Err(CommandError::data(Error::NoNotebooks(corpus.to_path_buf())));
    }
    let external = match external_pairs {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(CommandError::data)?;
            Some(parse_external_pairs(&text)?)
        }
        None => None,
    };
    let engine = Engine::build(load.notebooks, external.as_ref(), EngineConfig::default())?;
    engine.save(index)?;

    let stats = engine.stats();
    println!("notebooks        {}", stats.notebooks);
    println!("cells            {}", stats.cells);
    println!("code cells       {}", stats.code_cells);
    println!("markdown cells   {}", stats.markdown_cells);
    println!("blank code cells {}", stats.blank_code_cells);
    println!("indexed cells    {}", stats.indexed_cells);
    for (origin, count) in &stats.origins {
        let label = serde_json::to_value(origin).ok();
        let label = label.as_ref().and_then(|v| v.as_str()).unwrap_or("?");
        println!("  {label:<14} {count}");
    }
    println!("index written to {}", index.display());
    Ok(())
}

fn print_text(resp: &SearchResponse, engine: &Engine) {
    if resp.flags.contains(FLAG_OUT_OF_VOCABULARY) {
        println!("no semantic match: no query word is in the index vocabulary");
        return;
    }
    if resp.items.is_empty() {
        println!("no results");
        return;
    }
    for item in &resp.items {
        let path = engine.notebook(&item.notebook_id).map_or("?", |nb| nb.path.as_str());
        println!("#{:<3} {:.4}  {}  [cell {}]", item.rank, item.score, path, item.cell_id.index);
        for line in item.snippet.lines() {
            println!("      {line}");
        }
        println!();
    }
}

pub fn search(query: &str, index: &Path, k: usize, dedup: bool, json: bool) -> Result {
    let engine = load_engine(index)?;
    let resp = engine.search(&SearchRequest { query: query.to_string(), k, dedup })?;
    if json {
        let out = serde_json::to_string(&resp).map_err(CommandError::data)?;
        println!("{out}");
    } else {
        print_text(&resp, &engine);
    }
    Ok(())
}

pub fn serve(index: &Path, host: &str, port: u16, static_dir: Option<PathBuf>) -> Result {
    let state = if index.exists() {
        AppState::new(Some(load_engine(index)?))
    } else {
        println!("index {} does not exist; search requests will return 503", index.display());
        AppState::new(None)
    };
    let app = router(state, static_dir);
    let runtime = tokio::runtime::Runtime::new().map_err(CommandError::data)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .with_context(|| format!("binding {host}:{port}"))
            .map_err(CommandError::data)?;
        println!("listening on http://{}", listener.local_addr().map_err(CommandError::data)?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(CommandError::data)
    })
}

#[derive(Deserialize)]
struct BleuRecord {
    #[serde(alias = "descriptor")]
    candidate: String,
    reference: String,
}

pub fn eval_bleu(pairs: &Path, max_n: usize) -> Result {
    let text = std::fs::read_to_string(pairs)
        .with_context(|| format!("reading {}", pairs.display()))
        .map_err(CommandError::data)?;
    let mut reports = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: BleuRecord = serde_json::from_str(line)
            .with_context(|| format!("{} line {}", pairs.display(), i + 1))
            .map_err(CommandError::data)?;
        reports.push(bleu(&rec.candidate, &rec.reference, max_n));
    }
    let summary = summarize(&reports, max_n);
    println!("{:<12}{:>10}", "metric", "score");
    for (n, p) in &summary.mean_per_n {
        println!("{:<12}{:>10.4}", format!("{n}-gram"), p);
    }
    println!("{:<12}{:>10.4}", "cumulative", summary.mean_cumulative);
    println!("{:<12}{:>10}", "sentences", summary.sentences);
    Ok(())
}

pub fn align(index: &Path, notebooks: &[String], json: bool) -> Result {
    let engine = load_engine(index)?;
    let ids: Vec<&str> = notebooks.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    if ids.is_empty() {
        return Err(CommandError::usage(anyhow::anyhow!("--notebooks needs at least one id")));
    }
    let grid = engine.align(&ids)?;
    if json {
        println!("{}", serde_json::to_string(&grid).map_err(CommandError::data)?);
        return Ok(());
    }
    let header: Vec<String> = grid.column_order.iter().map(|id| format!("{id:>18}")).collect();
    println!("{:>5} {}", "row", header.join(""));
    for (r, row) in grid.rows.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .map(|e| match e {
                Some(i) => format!("{i:>18}"),
                None => format!("{:>18}", "."),
            })
            .collect();
        println!("{r:>5} {}", cells.join(""));
    }
    Ok(())
}
