//! Person, place and organization candidates from the scenario headers,
//! event locations and bookmark hosts.
//!
//!     cargo run --example schema_extractors -- [gazetteer.tsv]

use std::path::Path;

use pim_concept_miner::extract::{extract_all, rediscover, DomainRules, Gazetteer};
use pim_concept_miner::ingest::{crawl, SourceSpec};
use pim_concept_miner::model::SourceFormat;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenario");
    let corpus = crawl(&[
        SourceSpec::new(root.join("mail"), SourceFormat::EmlDirectory),
        SourceSpec::new(root.join("Archive.mbox"), SourceFormat::Mbox),
        SourceSpec::new(root.join("calendar.ics"), SourceFormat::Ics),
        SourceSpec::new(root.join("bookmarks.html"), SourceFormat::BookmarksHtml),
    ])?;
    let gazetteer = match std::env::args().nth(1) {
        Some(p) => Gazetteer::load(Path::new(&p))?,
        None => Gazetteer::bundled(),
    };
    println!("gazetteer: {} entries", gazetteer.len());

    let candidates = extract_all(&corpus, &gazetteer, &DomainRules::default());
    for c in &candidates {
        let found = rediscover(c, &corpus);
        println!(
            "{:<13} {:<24} {:>2} extracted  {:>2} in free text",
            c.concept_type.as_str(),
            c.label,
            c.occurrences.len(),
            found.len()
        );
    }

    let rules = DomainRules::default();
    for host in ["www.mercurtainment.com", "news.bbc.co.uk", "mail.gmail.com", "10.0.0.1"] {
        println!("{host:<24} -> {:?}", rules.organization_label(host));
    }
    Ok(())
}
