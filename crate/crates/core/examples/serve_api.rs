//! Starts the triage service on the scenario corpus.
//!
//!     cargo run --example serve_api -- [port]
//!     curl 'localhost:7431/api/terms?limit=5'
//!     curl -X POST localhost:7431/api/terms/mlkg/classify -H 'content-type: application/json' \
//!          -d '{"status":"promising","type":"project"}'

use std::path::Path;

use pim_concept_miner::extract::Gazetteer;
use pim_concept_miner::ingest::{crawl, SourceSpec};
use pim_concept_miner::model::SourceFormat;
use pim_concept_miner::service::{serve, Workspace, DEFAULT_PORT};
use pim_concept_miner::textprep::IndexOptions;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let port = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(DEFAULT_PORT);
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenario");
    let corpus = crawl(&[
        SourceSpec::new(root.join("mail"), SourceFormat::EmlDirectory),
        SourceSpec::new(root.join("Archive.mbox"), SourceFormat::Mbox),
        SourceSpec::new(root.join("calendar.ics"), SourceFormat::Ics),
        SourceSpec::new(root.join("bookmarks.html"), SourceFormat::BookmarksHtml),
    ])?;
    // No session path: decisions live for the lifetime of the process.
    let ws = Workspace::open(corpus, None, &Gazetteer::bundled(), IndexOptions::default())?;
    println!("http://127.0.0.1:{port}/api/terms");
    serve(ws, port).await?;
    Ok(())
}
