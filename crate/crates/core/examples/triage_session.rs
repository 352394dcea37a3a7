//! A scripted triage pass: promote the top acronyms, discard the noise,
//! watch coverage grow, then save the session.
//!
//!     cargo run --example triage_session -- [session.json]

use std::path::{Path, PathBuf};

use pim_concept_miner::extract::{ConceptType, Gazetteer};
use pim_concept_miner::ingest::{crawl, SourceSpec};
use pim_concept_miner::metrics::preset;
use pim_concept_miner::model::{Silo, SourceFormat};
use pim_concept_miner::service::Workspace;
use pim_concept_miner::textprep::IndexOptions;
use pim_concept_miner::triage::Status;

fn report(ws: &Workspace) {
    let cov = ws.coverage();
    let silos: Vec<String> = Silo::ALL
        .iter()
        .map(|s| format!("{s} {}/{}", cov.silos[s].covered, cov.silos[s].total))
        .collect();
    println!(
        "  rev {:>2}  promising {:>3}  discarded {:>3}  open {:>3}  | {}",
        ws.session().revision,
        cov.terms.promising,
        cov.terms.discarded,
        cov.terms.unclassified,
        silos.join("  ")
    );
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenario");
    let corpus = crawl(&[
        SourceSpec::new(root.join("mail"), SourceFormat::EmlDirectory),
        SourceSpec::new(root.join("Archive.mbox"), SourceFormat::Mbox),
        SourceSpec::new(root.join("calendar.ics"), SourceFormat::Ics),
        SourceSpec::new(root.join("bookmarks.html"), SourceFormat::BookmarksHtml),
    ])?;
    let dir = tempfile::tempdir()?;
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| dir.path().join("session.json"));

    let mut ws = Workspace::open(corpus, Some(&path), &Gazetteer::bundled(), IndexOptions::default())?;
    println!("seeded from {} candidates", ws.session().candidates.len());
    report(&ws);

    ws.set_combination(preset("acronyms & projects").unwrap())?;
    for row in ws.terms_page(Some(Status::Unclassified), 0, 3)? {
        println!("promote {}", row.surface);
        ws.classify(&row.key, Status::Promising, Some(ConceptType::Project))?;
        report(&ws);
    }

    ws.set_combination(preset("frequent topics").unwrap())?;
    for row in ws.terms_page(Some(Status::Unclassified), 0, 5)? {
        if row.surface.chars().count() <= 4 {
            println!("discard {}", row.surface);
            ws.classify(&row.key, Status::Discarded, None)?;
        }
    }
    report(&ws);

    for row in ws.session().occurrences_of(&ws.corpus, &ws.index, "mlkg")?.iter().take(4) {
        let flat = |s: &str| s.replace('\n', " ");
        println!("  [{}] ...{}[{}]{}...", row.silo, flat(&row.before), row.surface, flat(&row.after));
    }
    println!("saved to {}", path.display());
    Ok(())
}
