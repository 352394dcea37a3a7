use std::collections::HashSet;
use std::path::Path;

use super::matcher::{fold_str, longest_non_overlapping, Hit, Matcher};
use super::ConceptType;

const BUNDLED: &str = include_str!("../../data/gazetteer.tsv");

#[derive(Debug, thiserror::Error)]
pub enum GazetteerError {
    #[error("cannot read gazetteer: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GazetteerEntry {
    pub surface: String,
    pub concept_type: ConceptType,
    pub label: String,
}

/// Known surface forms with their type and canonical label.
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
    matcher: Matcher,
}

impl std::fmt::Debug for Gazetteer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gazetteer").field("entries", &self.entries.len()).finish()
    }
}

impl Gazetteer {
    pub fn new(entries: Vec<GazetteerEntry>) -> Result<Self, GazetteerError> {
        let mut seen = HashSet::new();
        for (i, e) in entries.iter().enumerate() {
            if e.surface.trim().is_empty() || e.label.trim().is_empty() {
                return Err(GazetteerError::Format { line: i + 1, reason: "empty surface or label".into() });
            }
            if !seen.insert((fold_str(e.surface.trim()), e.concept_type)) {
                return Err(GazetteerError::Format {
                    line: i + 1,
                    reason: format!("duplicate entry {:?} ({})", e.surface, e.concept_type.as_str()),
                });
            }
        }
        let matcher = Matcher::new(&entries.iter().map(|e| e.surface.as_str()).collect::<Vec<_>>());
        Ok(Gazetteer { entries, matcher })
    }

    /// Parses `surface<TAB>type<TAB>label` lines; `#` starts a comment line.
    pub fn from_tsv(text: &str) -> Result<Self, GazetteerError> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let err = |reason: String| GazetteerError::Format { line: n + 1, reason };
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let [surface, ty, label] = cols[..] else {
                return Err(err(format!("expected 3 columns, found {}", cols.len())));
            };
            let concept_type = ConceptType::from_name(ty).ok_or_else(|| err(format!("unknown type {ty:?}")))?;
            if surface.is_empty() || label.is_empty() {
                return Err(err("empty surface or label".into()));
            }
            if !seen.insert((fold_str(surface), concept_type)) {
                return Err(err(format!("duplicate entry {surface:?} ({ty})")));
            }
            entries.push(GazetteerEntry {
                surface: surface.to_string(),
                concept_type,
                label: label.to_string(),
            });
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self, GazetteerError> {
        Self::from_tsv(&std::fs::read_to_string(path)?)
    }

    /// Countries, capitals and larger cities.
    pub fn bundled() -> Self {
        Self::from_tsv(BUNDLED).expect("bundled gazetteer is valid")
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Longest non-overlapping hits of entries of type `ty` in `text`.
    pub fn find(&self, text: &str, ty: ConceptType) -> Vec<(Hit, &GazetteerEntry)> {
        let hits = self
            .matcher
            .find_all(text)
            .into_iter()
            .filter(|h| self.entries[h.pattern].concept_type == ty)
            .collect();
        longest_non_overlapping(hits)
            .into_iter()
            .map(|h| (h, &self.entries[h.pattern]))
            .collect()
    }
}
