use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pim_concept_miner::export::{export_graph, ExportFormat};
use pim_concept_miner::extract::Gazetteer;
use pim_concept_miner::ingest::{crawl, SourceSpec};
use pim_concept_miner::metrics::{preset, MetricCombination, MetricTable};
use pim_concept_miner::model::{Corpus, SourceFormat};
use pim_concept_miner::service::{serve, ServiceError, Workspace, DEFAULT_PORT};
use pim_concept_miner::textprep::{build_term_index, IndexOptions};
use pim_concept_miner::triage::{TriageError, TriageSession};

#[derive(Parser)]
#[command(name = "pim-miner", version, about = "Mine concept candidates from mail, calendar and bookmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse sources into a corpus file.
    Crawl {
        #[arg(long = "mbox")]
        mbox: Vec<PathBuf>,
        #[arg(long = "eml-dir")]
        eml_dir: Vec<PathBuf>,
        #[arg(long = "ics")]
        ics: Vec<PathBuf>,
        #[arg(long = "bookmarks")]
        bookmarks: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the top ranked terms of a corpus.
    Rank {
        corpus: PathBuf,
        #[arg(long, conflicts_with = "weights")]
        preset: Option<String>,
        /// e.g. acronymScore=3,siloSpread=2
        #[arg(long)]
        weights: Option<String>,
        #[arg(long, default_value_t = 20)]
        top: usize,
        #[arg(long)]
        ngrams: bool,
    },
    /// Run the triage HTTP service on 127.0.0.1.
    Serve {
        corpus: PathBuf,
        #[arg(long)]
        session: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long)]
        gazetteer: Option<PathBuf>,
    },
    /// Write the knowledge graph of a session.
    Export {
        session: PathBuf,
        corpus: PathBuf,
        #[arg(long)]
        format: String,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Source(String),
    Session(String),
}

impl From<TriageError> for Failure {
    fn from(e: TriageError) -> Self {
        match e {
            TriageError::Corrupt(_) | TriageError::CorpusMismatch { .. } => Failure::Session(e.to_string()),
            TriageError::InvalidCombination(_) => Failure::Usage(e.to_string()),
            _ => Failure::Source(e.to_string()),
        }
    }
}

fn load_corpus(path: &Path) -> Result<Corpus, Failure> {
    Corpus::load(path).map_err(|e| Failure::Source(format!("{}: {e}", path.display())))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Crawl { mbox, eml_dir, ics, bookmarks, out } => {
            let specs: Vec<SourceSpec> = [
                (mbox, SourceFormat::Mbox),
                (eml_dir, SourceFormat::EmlDirectory),
                (ics, SourceFormat::Ics),
                (bookmarks, SourceFormat::BookmarksHtml),
            ]
            .into_iter()
            .flat_map(|(paths, format)| paths.into_iter().map(move |p| SourceSpec::new(p, format)))
            .collect();
            if specs.is_empty() {
                return Err(Failure::Usage("no sources given".into()));
            }
            let corpus = crawl(&specs).map_err(|e| Failure::Source(e.to_string()))?;
            for entry in corpus.manifest() {
                eprintln!("{}: {} items, {} duplicates", entry.path, entry.item_count, entry.duplicates);
                for note in &entry.notes {
                    eprintln!("  note: {note}");
                }
            }
            corpus.save(&out).map_err(|e| Failure::Source(format!("{}: {e}", out.display())))?;
            println!("{} items -> {}", corpus.len(), out.display());
        }
        Command::Rank { corpus, preset: name, weights, top, ngrams } => {
            let combination = match (name, weights) {
                (Some(n), _) => preset(&n).ok_or_else(|| Failure::Usage(format!("unknown preset {n:?}")))?,
                (None, Some(w)) => MetricCombination::parse_weights(&w).map_err(|e| Failure::Usage(e.to_string()))?,
                (None, None) => preset("balanced").expect("balanced preset"),
            };
            let corpus = load_corpus(&corpus)?;
            let index = build_term_index(&corpus, IndexOptions { ngrams });
            let table = MetricTable::build(&corpus, &index);
            let ranking = table.ranking(&combination).map_err(|e| Failure::Usage(e.to_string()))?;
            for (n, r) in ranking.iter().take(top).enumerate() {
                let surface = index.get(&r.key).map_or(r.key.as_str(), |t| t.display_surface());
                println!("{:>4}  {:.6}  {:>5}  {}", n + 1, r.score, r.count, surface);
            }
        }
        Command::Serve { corpus, session, port, gazetteer } => {
            let corpus = load_corpus(&corpus)?;
            let gazetteer = match gazetteer {
                Some(p) => Gazetteer::load(&p).map_err(|e| Failure::Source(format!("{}: {e}", p.display())))?,
                None => Gazetteer::bundled(),
            };
            let workspace = Workspace::open(corpus, session.as_deref(), &gazetteer, IndexOptions::default())?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Source(e.to_string()))?;
            eprintln!("listening on http://127.0.0.1:{port}/api");
            runtime.block_on(serve(workspace, port)).map_err(|e| match e {
                ServiceError::Session(t) => Failure::from(t),
                other => Failure::Source(other.to_string()),
            })?;
        }
        Command::Export { session, corpus, format, out } => {
            let format = ExportFormat::from_name(&format).map_err(|e| Failure::Usage(e.to_string()))?;
            let corpus = load_corpus(&corpus)?;
            let session = TriageSession::load(&session).map_err(|e| match e {
                TriageError::Io(io) => Failure::Source(format!("{}: {io}", session.display())),
                other => Failure::Session(other.to_string()),
            })?;
            session.check_corpus(&corpus)?;
            let index = build_term_index(&corpus, IndexOptions::default());
            let bytes = export_graph(&session, &corpus, &index, format);
            std::fs::write(&out, bytes).map_err(|e| Failure::Source(format!("{}: {e}", out.display())))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Source(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Session(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
