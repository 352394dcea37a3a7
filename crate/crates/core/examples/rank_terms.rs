//! Ranks the scenario terms under every shipped preset.
//!
//!     cargo run --example rank_terms -- [top]

use std::path::Path;

use pim_concept_miner::ingest::{crawl, SourceSpec};
use pim_concept_miner::metrics::{presets, Metric, MetricTable};
use pim_concept_miner::model::SourceFormat;
use pim_concept_miner::textprep::{build_term_index, IndexOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let top: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10);
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenario");
    let corpus = crawl(&[
        SourceSpec::new(root.join("mail"), SourceFormat::EmlDirectory),
        SourceSpec::new(root.join("Archive.mbox"), SourceFormat::Mbox),
        SourceSpec::new(root.join("calendar.ics"), SourceFormat::Ics),
        SourceSpec::new(root.join("bookmarks.html"), SourceFormat::BookmarksHtml),
    ])?;
    let index = build_term_index(&corpus, IndexOptions::default());
    let table = MetricTable::build(&corpus, &index);
    println!("{} items, {} terms\n", corpus.len(), index.len());

    for combination in presets() {
        println!("== {} ==", combination.name);
        for r in table.ranking(&combination)?.iter().take(top) {
            let v = table.get(&r.key).expect("vector for ranked term");
            let shown: Vec<String> = combination
                .weights
                .keys()
                .map(|m| format!("{}={:.3}", m.name(), v.get(*m)))
                .collect();
            println!("  {:.4} {:>4}  {:<20} {}", r.score, r.count, index.get(&r.key).unwrap().display_surface(), shown.join(" "));
        }
        println!();
    }

    let mlkg = table.get("mlkg").expect("scenario contains MLKG");
    for m in Metric::ALL {
        println!("mlkg {:<15} {:.4}", m.name(), mlkg.get(m));
    }
    Ok(())
}
