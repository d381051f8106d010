//! `nbsearch`: build, query, serve and evaluate a notebook search index.
//!
//! Exit status is 0 on success, 1 for usage errors and 2 for data errors
//! (missing, malformed or corrupt files).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "nbsearch", version, about = "Semantic and keyword search over notebook cells")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a corpus of .ipynb files and build the index.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, env = "NBSEARCH_INDEX")]
        index: PathBuf,
        /// JSON lines of {"cell_id","descriptor"} from an external generator.
        #[arg(long)]
        external_pairs: Option<PathBuf>,
    },
    /// Run one query. Wrap the query in double quotes for keyword search.
    Search {
        query: String,
        #[arg(long, env = "NBSEARCH_INDEX")]
        index: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Allow several cells from the same notebook.
        #[arg(long)]
        no_dedup: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Serve the HTTP API (and optionally a static front end).
    Serve {
        #[arg(long, env = "NBSEARCH_INDEX")]
        index: PathBuf,
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
    /// Score candidate descriptors against references with BLEU.
    EvalBleu {
        /// JSON lines of {"candidate","reference"}.
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..=4))]
        max_n: u8,
    },
    /// Print the alignment grid for a list of notebooks.
    Align {
        #[arg(long, env = "NBSEARCH_INDEX")]
        index: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        notebooks: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Ingest { corpus, index, external_pairs } => {
            commands::ingest(&corpus, &index, external_pairs.as_deref())
        }
        Command::Search { query, index, k, no_dedup, format } => {
            commands::search(&query, &index, k, !no_dedup, format == Format::Json)
        }
        Command::Serve { index, port, host, static_dir } => {
            commands::serve(&index, &host, port, static_dir)
        }
        Command::EvalBleu { pairs, max_n } => commands::eval_bleu(&pairs, usize::from(max_n)),
        Command::Align { index, notebooks, format } => {
            commands::align(&index, &notebooks, format == Format::Json)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code())
        }
    }
}
