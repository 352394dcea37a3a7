//! Interactive classification state: promising and discarded terms, concept
//! types, progress and coverage.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::extract::{fold_str, rediscover, ConceptCandidate, ConceptType};
use crate::links::CrossLink;
use crate::metrics::{preset, MetricCombination, MetricsError};
use crate::model::{Corpus, FieldKind, ItemId, Silo, TermOccurrence};
use crate::persist::atomic_write;
use crate::textprep::{tokenize, TermIndex};

/// Characters of context shown on each side of an occurrence.
pub const CONTEXT_CHARS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Unclassified,
    Promising,
    Discarded,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Unclassified => "unclassified",
            Status::Promising => "promising",
            Status::Discarded => "discarded",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = TriageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Status::Unclassified, Status::Promising, Status::Discarded]
            .into_iter()
            .find(|st| st.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| TriageError::InvalidStatus(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Auto,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub status: Status,
    pub provenance: Provenance,
}

#[derive(Debug, thiserror::Error)]
pub enum TriageError {
    #[error("unknown term {0:?}")]
    UnknownTerm(String),
    #[error("invalid status {0:?}; expected promising or discarded")]
    InvalidStatus(String),
    #[error("session belongs to corpus {expected}, not {found}")]
    CorpusMismatch { expected: String, found: String },
    #[error(transparent)]
    InvalidCombination(#[from] MetricsError),
    #[error("cannot access session file: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt session file: {0}")]
    Corrupt(#[from] serde_json::Error),
}

/// Everything the user decided so far, plus the seeds it started from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TriageSession {
    pub corpus_ref: String,
    pub revision: u64,
    /// Only keys that are not unclassified are stored.
    classifications: BTreeMap<String, Classification>,
    concept_types: BTreeMap<String, ConceptType>,
    combination: MetricCombination,
    pub candidates: Vec<ConceptCandidate>,
    pub links: Vec<CrossLink>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub unclassified: usize,
    pub promising: usize,
    pub discarded: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiloCoverage {
    pub total: usize,
    pub covered: usize,
    pub uncovered: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoverageReport {
    pub silos: BTreeMap<Silo, SiloCoverage>,
    pub terms: Progress,
}

/// One occurrence with its surrounding text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContextRow {
    pub item_id: ItemId,
    pub silo: Silo,
    pub summary: String,
    pub field_kind: FieldKind,
    pub char_start: usize,
    pub char_end: usize,
    pub before: String,
    pub surface: String,
    pub after: String,
}

impl TriageSession {
    /// Fresh session. Every index key found among the tokens of an extracted
    /// person or place label starts out promising.
    pub fn new(corpus: &Corpus, index: &TermIndex, candidates: Vec<ConceptCandidate>) -> Result<Self, TriageError> {
        check_corpus(index.corpus_ref(), corpus)?;
        let mut session = TriageSession {
            corpus_ref: corpus.content_hash(),
            revision: 0,
            classifications: BTreeMap::new(),
            concept_types: BTreeMap::new(),
            combination: preset("balanced").expect("balanced preset"),
            candidates,
            links: Vec::new(),
        };
        let mut seeds: Vec<(String, ConceptType)> = Vec::new();
        for c in &session.candidates {
            if !matches!(c.concept_type, ConceptType::Person | ConceptType::Place) {
                continue;
            }
            for token in tokenize(&c.label) {
                let key = token.key();
                if index.contains(&key) {
                    seeds.push((key, c.concept_type));
                }
            }
        }
        for (key, ty) in seeds {
            session.auto_classify(&key, Status::Promising, Some(ty));
        }
        session.revision = 0;
        Ok(session)
    }

    pub fn combination(&self) -> &MetricCombination {
        &self.combination
    }

    pub fn set_combination(&mut self, c: MetricCombination) -> Result<u64, TriageError> {
        c.validate()?;
        self.combination = c;
        self.revision += 1;
        Ok(self.revision)
    }

    pub fn classifications(&self) -> &BTreeMap<String, Classification> {
        &self.classifications
    }

    pub fn concept_types(&self) -> &BTreeMap<String, ConceptType> {
        &self.concept_types
    }

    pub fn status(&self, key: &str) -> Status {
        self.classifications.get(key).map_or(Status::Unclassified, |c| c.status)
    }

    pub fn classification(&self, key: &str) -> Option<Classification> {
        self.classifications.get(key).copied()
    }

    pub fn concept_type(&self, key: &str) -> Option<ConceptType> {
        self.concept_types.get(key).copied()
    }

    /// Maps user input to the key classifications are stored under: an index
    /// key, or the label of a seeded candidate.
    pub fn resolve_key(&self, index: &TermIndex, input: &str) -> Option<String> {
        if index.contains(input) {
            return Some(input.to_string());
        }
        let folded = fold_str(input.trim());
        if index.contains(&folded) {
            return Some(folded);
        }
        self.candidates
            .iter()
            .find(|c| fold_str(&c.label) == folded)
            .map(|c| c.label.clone())
    }

    fn candidate(&self, label: &str) -> Option<&ConceptCandidate> {
        self.candidates.iter().find(|c| c.label == label)
    }

    fn apply(&mut self, key: &str, status: Status, provenance: Provenance, ty: Option<ConceptType>) {
        match status {
            Status::Unclassified => {
                self.classifications.remove(key);
                self.concept_types.remove(key);
            }
            Status::Discarded => {
                self.classifications.insert(key.to_string(), Classification { status, provenance });
                self.concept_types.remove(key);
            }
            Status::Promising => {
                self.classifications.insert(key.to_string(), Classification { status, provenance });
                let ty = ty
                    .or_else(|| self.concept_types.get(key).copied())
                    .or_else(|| self.candidate(key).map(|c| c.concept_type))
                    .unwrap_or(ConceptType::Topic);
                self.concept_types.insert(key.to_string(), ty);
            }
        }
    }

    /// Records a user decision and returns the new revision.
    pub fn classify(
        &mut self,
        index: &TermIndex,
        key: &str,
        status: Status,
        ty: Option<ConceptType>,
    ) -> Result<u64, TriageError> {
        if status == Status::Unclassified {
            return Err(TriageError::InvalidStatus(status.to_string()));
        }
        let key = self
            .resolve_key(index, key)
            .ok_or_else(|| TriageError::UnknownTerm(key.to_string()))?;
        self.apply(&key, status, Provenance::User, ty);
        self.revision += 1;
        Ok(self.revision)
    }

    /// Automatic decision; never overrides one the user made. Returns whether
    /// anything changed.
    pub fn auto_classify(&mut self, key: &str, status: Status, ty: Option<ConceptType>) -> bool {
        match self.classifications.get(key) {
            Some(c) if c.provenance == Provenance::User => false,
            Some(c) if c.status == status => false,
            _ => {
                self.apply(key, status, Provenance::Auto, ty);
                self.revision += 1;
                true
            }
        }
    }

    /// Index keys currently marked promising.
    pub fn promising_terms<'a>(&'a self, index: &'a TermIndex) -> impl Iterator<Item = &'a str> + 'a {
        self.classifications
            .iter()
            .filter(move |(k, c)| c.status == Status::Promising && index.contains(k))
            .map(|(k, _)| k.as_str())
    }

    pub fn progress(&self, index: &TermIndex) -> Progress {
        let mut p = Progress { total: index.len(), ..Progress::default() };
        for (key, c) in &self.classifications {
            if !index.contains(key) {
                continue;
            }
            match c.status {
                Status::Promising => p.promising += 1,
                Status::Discarded => p.discarded += 1,
                Status::Unclassified => {}
            }
        }
        p.unclassified = p.total - p.promising - p.discarded;
        p
    }

    /// Full recomputation of which items contain at least one promising term.
    pub fn coverage(&self, corpus: &Corpus, index: &TermIndex) -> CoverageReport {
        let mut covered: HashSet<&ItemId> = HashSet::new();
        for key in self.promising_terms(index) {
            if let Some(rec) = index.get(key) {
                covered.extend(rec.occurrences.iter().map(|o| &o.item_id));
            }
        }
        let mut silos: BTreeMap<Silo, SiloCoverage> = Silo::ALL.map(|s| (s, SiloCoverage::default())).into();
        for item in corpus.items() {
            let entry = silos.get_mut(&item.silo).expect("all silos present");
            entry.total += 1;
            if covered.contains(&item.id) {
                entry.covered += 1;
            } else {
                entry.uncovered += 1;
            }
        }
        CoverageReport { silos, terms: self.progress(index) }
    }

    /// Every occurrence of a term with ±40 characters of context, in
    /// document order.
    pub fn occurrences_of(&self, corpus: &Corpus, index: &TermIndex, key: &str) -> Result<Vec<ContextRow>, TriageError> {
        let resolved = self
            .resolve_key(index, key)
            .ok_or_else(|| TriageError::UnknownTerm(key.to_string()))?;
        let occurrences: Vec<TermOccurrence> = match index.get(&resolved) {
            Some(rec) => rec.occurrences.clone(),
            None => {
                let candidate = self.candidate(&resolved).expect("resolved candidate");
                let mut all: Vec<TermOccurrence> = candidate.occurrences.clone();
                all.extend(rediscover(candidate, corpus));
                let mut seen = BTreeSet::new();
                all.retain(|o| seen.insert(o.clone()));
                all.sort_by_key(|o| (corpus.item_position(&o.item_id), o.field_kind, o.char_start, o.char_end));
                all
            }
        };
        Ok(occurrences.iter().filter_map(|o| context_row(corpus, o)).collect())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("session serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, TriageError> {
        let session: TriageSession = serde_json::from_str(text)?;
        session.combination.validate()?;
        Ok(session)
    }

    /// Writes via a temporary file and rename; the previous file stays intact
    /// until the new one is complete.
    pub fn save(&self, path: &Path) -> Result<(), TriageError> {
        atomic_write(path, self.to_json().as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TriageError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Fails unless the session was made for `corpus`.
    pub fn check_corpus(&self, corpus: &Corpus) -> Result<(), TriageError> {
        check_corpus(&self.corpus_ref, corpus)
    }
}

fn check_corpus(expected: &str, corpus: &Corpus) -> Result<(), TriageError> {
    let found = corpus.content_hash();
    if expected != found {
        return Err(TriageError::CorpusMismatch { expected: expected.to_string(), found });
    }
    Ok(())
}

fn context_row(corpus: &Corpus, o: &TermOccurrence) -> Option<ContextRow> {
    let item = corpus.item(&o.item_id)?;
    let text = item.text(o.field_kind)?;
    let chars: Vec<char> = text.chars().collect();
    if o.char_start > o.char_end || o.char_end > chars.len() {
        return None;
    }
    let from = o.char_start.saturating_sub(CONTEXT_CHARS);
    let to = (o.char_end + CONTEXT_CHARS).min(chars.len());
    Some(ContextRow {
        item_id: item.id.clone(),
        silo: item.silo,
        summary: item.summary(),
        field_kind: o.field_kind,
        char_start: o.char_start,
        char_end: o.char_end,
        before: chars[from..o.char_start].iter().collect(),
        surface: chars[o.char_start..o.char_end].iter().collect(),
        after: chars[o.char_end..to].iter().collect(),
    })
}

/// Covered-item counts kept up to date per classification instead of being
/// recomputed from scratch.
#[derive(Debug, Clone)]
pub struct CoverageTracker {
    /// Promising terms occurring in each item, by corpus position.
    hits: Vec<u32>,
    silo_of: Vec<Silo>,
    covered: BTreeMap<Silo, usize>,
    totals: BTreeMap<Silo, usize>,
}

impl CoverageTracker {
    pub fn new(corpus: &Corpus, index: &TermIndex, session: &TriageSession) -> Self {
        let silo_of: Vec<Silo> = corpus.items().iter().map(|i| i.silo).collect();
        let mut totals: BTreeMap<Silo, usize> = Silo::ALL.map(|s| (s, 0)).into();
        for s in &silo_of {
            *totals.get_mut(s).expect("all silos") += 1;
        }
        let mut tracker = CoverageTracker {
            hits: vec![0; silo_of.len()],
            silo_of,
            covered: Silo::ALL.map(|s| (s, 0)).into(),
            totals,
        };
        let promising: Vec<String> = session.promising_terms(index).map(str::to_string).collect();
        for key in promising {
            tracker.shift(corpus, index, &key, true);
        }
        tracker
    }

    fn shift(&mut self, corpus: &Corpus, index: &TermIndex, key: &str, up: bool) {
        let Some(rec) = index.get(key) else { return };
        for id in rec.item_ids() {
            let Some(pos) = corpus.item_position(id) else { continue };
            let silo = self.silo_of[pos];
            let slot = &mut self.hits[pos];
            if up {
                *slot += 1;
                if *slot == 1 {
                    *self.covered.get_mut(&silo).expect("all silos") += 1;
                }
            } else if *slot > 0 {
                *slot -= 1;
                if *slot == 0 {
                    *self.covered.get_mut(&silo).expect("all silos") -= 1;
                }
            }
        }
    }

    /// Accounts for `key` moving from status `before` to `after`.
    pub fn update(&mut self, corpus: &Corpus, index: &TermIndex, key: &str, before: Status, after: Status) {
        match (before == Status::Promising, after == Status::Promising) {
            (false, true) => self.shift(corpus, index, key, true),
            (true, false) => self.shift(corpus, index, key, false),
            _ => {}
        }
    }

    pub fn report(&self, session: &TriageSession, index: &TermIndex) -> CoverageReport {
        let silos = Silo::ALL
            .map(|s| {
                let total = self.totals[&s];
                let covered = self.covered[&s];
                (s, SiloCoverage { total, covered, uncovered: total - covered })
            })
            .into();
        CoverageReport { silos, terms: session.progress(index) }
    }
}
