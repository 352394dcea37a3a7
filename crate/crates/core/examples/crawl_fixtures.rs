//! Crawls the bundled scenario sources and prints what each one produced.
//!
//!     cargo run --example crawl_fixtures -- [out.json]

use std::path::Path;

use pim_concept_miner::ingest::{crawl, SourceSpec};
use pim_concept_miner::model::{Silo, SourceFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenario");
    let specs = [
        SourceSpec::new(root.join("mail"), SourceFormat::EmlDirectory),
        SourceSpec::new(root.join("Archive.mbox"), SourceFormat::Mbox),
        SourceSpec::new(root.join("calendar.ics"), SourceFormat::Ics),
        SourceSpec::new(root.join("bookmarks.html"), SourceFormat::BookmarksHtml),
    ];
    let corpus = crawl(&specs)?;

    for entry in corpus.manifest() {
        println!("{:<60} {:>3} items  {} dup  {} notes", entry.path, entry.item_count, entry.duplicates, entry.notes.len());
    }
    for silo in Silo::ALL {
        println!("{silo}: {} items", corpus.count_in(silo));
        if let Some(tree) = corpus.folder_tree(silo) {
            tree.walk(&mut |node, depth| {
                if depth > 0 {
                    println!("{}{}", "  ".repeat(depth), node.name);
                }
            });
        }
    }
    println!("content hash {}", corpus.content_hash());

    if let Some(out) = std::env::args().nth(1) {
        corpus.save(Path::new(&out))?;
        println!("saved to {out}");
    }
    Ok(())
}
