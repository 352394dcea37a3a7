//! Source crawling: mail (mbox, EML trees), calendars (ICS) and browser
//! bookmark exports are parsed into [`PimItem`]s and merged into a
//! [`Corpus`].

mod bookmarks;
mod ics;
mod mail;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use bookmarks::parse_bookmarks_html;
pub use ics::{parse_ics, parse_ics_datetime, unescape_text, unfold};
pub use mail::{parse_eml_directory, parse_mbox, parse_message, split_address};

use crate::model::{Corpus, PimItem, SourceEntry, SourceFormat};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read source {path}: {source}")]
    UnreadableSource {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed message: {0}")]
    MalformedMessage(String),
}

/// Items recovered from one source plus notes about skipped parts.
#[derive(Debug, Default)]
pub struct Parsed {
    pub items: Vec<PimItem>,
    pub notes: Vec<String>,
}

impl Parsed {
    fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpec {
    pub path: PathBuf,
    pub format: SourceFormat,
}

impl SourceSpec {
    pub fn new(path: impl Into<PathBuf>, format: SourceFormat) -> Self {
        SourceSpec { path: path.into(), format }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, IngestError> {
    std::fs::read(path).map_err(|source| IngestError::UnreadableSource {
        path: path.display().to_string(),
        source,
    })
}

/// Parses a single source.
pub fn parse_source(spec: &SourceSpec) -> Result<Parsed, IngestError> {
    match spec.format {
        SourceFormat::Mbox => {
            let bytes = read(&spec.path)?;
            let folder = spec.path.file_stem().map(|s| s.to_string_lossy().into_owned());
            Ok(parse_mbox(&bytes, folder.as_deref()))
        }
        SourceFormat::EmlDirectory => parse_eml_directory(&spec.path),
        SourceFormat::Ics => Ok(parse_ics(&read(&spec.path)?)),
        SourceFormat::BookmarksHtml => Ok(parse_bookmarks_html(&read(&spec.path)?)),
    }
}

/// Parses all sources (concurrently) and merges them into one corpus.
///
/// Items whose id was already produced by an earlier source are dropped and
/// counted as duplicates in the manifest.
pub fn crawl(specs: &[SourceSpec]) -> Result<Corpus, IngestError> {
    let results: Vec<Result<Parsed, IngestError>> = specs.par_iter().map(parse_source).collect();
    let mut seen = HashSet::new();
    let mut items = Vec::new();
    let mut manifest = Vec::with_capacity(specs.len());
    for (spec, result) in specs.iter().zip(results) {
        let parsed = result?;
        let mut entry = SourceEntry {
            path: spec.path.display().to_string(),
            format: spec.format,
            item_count: parsed.items.len(),
            duplicates: 0,
            notes: parsed.notes,
        };
        for item in parsed.items {
            if seen.insert(item.id.clone()) {
                items.push(item);
            } else {
                entry.duplicates += 1;
            }
        }
        manifest.push(entry);
    }
    Ok(Corpus::from_items(items, manifest))
}
