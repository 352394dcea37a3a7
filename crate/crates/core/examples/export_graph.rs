//! Promotes a few terms and writes the resulting graph as Turtle and JSON.
//!
//!     cargo run --example export_graph -- [out_dir]

use std::path::{Path, PathBuf};

use pim_concept_miner::export::{export_graph, ExportFormat};
use pim_concept_miner::extract::{extract_all, ConceptType, DomainRules, Gazetteer};
use pim_concept_miner::ingest::{crawl, SourceSpec};
use pim_concept_miner::links::{link_all, DEFAULT_MIN_TOKENS};
use pim_concept_miner::model::SourceFormat;
use pim_concept_miner::textprep::{build_term_index, IndexOptions};
use pim_concept_miner::triage::{Status, TriageSession};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenario");
    let corpus = crawl(&[
        SourceSpec::new(root.join("mail"), SourceFormat::EmlDirectory),
        SourceSpec::new(root.join("Archive.mbox"), SourceFormat::Mbox),
        SourceSpec::new(root.join("calendar.ics"), SourceFormat::Ics),
        SourceSpec::new(root.join("bookmarks.html"), SourceFormat::BookmarksHtml),
    ])?;
    let index = build_term_index(&corpus, IndexOptions::default());
    let candidates = extract_all(&corpus, &Gazetteer::bundled(), &DomainRules::default());
    let mut session = TriageSession::new(&corpus, &index, candidates)?;
    session.links = link_all(&corpus, DEFAULT_MIN_TOKENS);

    session.classify(&index, "mlkg", Status::Promising, Some(ConceptType::Project))?;
    session.classify(&index, "Mercurtainment", Status::Promising, None)?;
    session.classify(&index, "agenda", Status::Promising, Some(ConceptType::Topic))?;

    let out = std::env::args().nth(1).map(PathBuf::from);
    for (format, name) in [(ExportFormat::Turtle, "graph.ttl"), (ExportFormat::Json, "graph.json")] {
        let bytes = export_graph(&session, &corpus, &index, format);
        match &out {
            Some(dir) => {
                std::fs::write(dir.join(name), &bytes)?;
                println!("wrote {} ({} bytes, {})", dir.join(name).display(), bytes.len(), format.media_type());
            }
            None => {
                let text = String::from_utf8(bytes)?;
                println!("== {name} ==");
                for line in text.lines().take(24) {
                    println!("{line}");
                }
                println!("... {} lines\n", text.lines().count());
            }
        }
    }
    Ok(())
}
