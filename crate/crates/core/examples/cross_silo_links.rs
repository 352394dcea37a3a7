//! Temporal, shared-URL and copied-text links between the scenario silos.
//!
//!     cargo run --example cross_silo_links -- [min_tokens]

use std::path::Path;

use chrono::NaiveDate;
use pim_concept_miner::ingest::{crawl, SourceSpec};
use pim_concept_miner::links::{detect_date_mentions, link_all, DEFAULT_MIN_TOKENS};
use pim_concept_miner::model::SourceFormat;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let min_tokens = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(DEFAULT_MIN_TOKENS);
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenario");
    let corpus = crawl(&[
        SourceSpec::new(root.join("mail"), SourceFormat::EmlDirectory),
        SourceSpec::new(root.join("Archive.mbox"), SourceFormat::Mbox),
        SourceSpec::new(root.join("calendar.ics"), SourceFormat::Ics),
        SourceSpec::new(root.join("bookmarks.html"), SourceFormat::BookmarksHtml),
    ])?;

    let reference = NaiveDate::from_ymd_opt(2019, 2, 5).unwrap();
    for text in ["see you on the 11th February", "Feb 11, 2020 or 11.02.2019", "2019-02-30 is not a day"] {
        let dates: Vec<String> = detect_date_mentions(text, reference).iter().map(|m| m.date.to_string()).collect();
        println!("{text:<32} {dates:?}");
    }
    println!();

    for link in link_all(&corpus, min_tokens) {
        let from = corpus.item(&link.from_item).map(|i| i.summary()).unwrap_or_default();
        let to = corpus.item(&link.to_item).map(|i| i.summary()).unwrap_or_default();
        let evidence: Vec<&str> = link.evidence.iter().map(|o| o.surface.as_str()).collect();
        println!("{:<10} {from:?} -> {to:?}", link.kind.as_str());
        println!("           {}  {:.60?}", link.detail, evidence);
    }
    Ok(())
}
