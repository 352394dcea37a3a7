//! Typed entity candidates from structured fields: persons from mail
//! addresses, places from event locations, organizations from domains.

mod gazetteer;
mod matcher;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use gazetteer::{Gazetteer, GazetteerEntry, GazetteerError};
pub use matcher::{fold_str, longest_non_overlapping, on_boundaries, Hit, Matcher};

use crate::ingest::split_address;
use crate::model::{Corpus, FieldKind, PimItem, TermOccurrence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptType {
    Person,
    Place,
    Organization,
    Topic,
    Project,
    Time,
}

impl ConceptType {
    pub const ALL: [ConceptType; 6] = [
        ConceptType::Person,
        ConceptType::Place,
        ConceptType::Organization,
        ConceptType::Topic,
        ConceptType::Project,
        ConceptType::Time,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConceptType::Person => "person",
            ConceptType::Place => "place",
            ConceptType::Organization => "organization",
            ConceptType::Topic => "topic",
            ConceptType::Project => "project",
            ConceptType::Time => "time",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let name = name.trim();
        Self::ALL.into_iter().find(|t| t.as_str().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for ConceptType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CandidateSource {
    MailHeader,
    GazetteerLocation,
    DomainName,
    UserPromoted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConceptCandidate {
    pub label: String,
    pub concept_type: ConceptType,
    pub occurrences: Vec<TermOccurrence>,
    pub source: CandidateSource,
}

/// Freemail stoplist and public-suffix list used to find organization names
/// in host names.
#[derive(Debug, Clone)]
pub struct DomainRules {
    pub stoplist: HashSet<String>,
    pub suffixes: HashSet<String>,
}

fn read_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.trim_matches('.').to_ascii_lowercase())
        .collect()
}

impl Default for DomainRules {
    fn default() -> Self {
        DomainRules {
            stoplist: read_list(include_str!("../../data/freemail.txt")),
            suffixes: read_list(include_str!("../../data/public_suffixes.txt")),
        }
    }
}

impl DomainRules {
    /// Replaces the bundled lists with files (one entry per line).
    pub fn load(stoplist: Option<&Path>, suffixes: Option<&Path>) -> std::io::Result<Self> {
        let mut rules = Self::default();
        if let Some(p) = stoplist {
            rules.stoplist = read_list(&std::fs::read_to_string(p)?);
        }
        if let Some(p) = suffixes {
            rules.suffixes = read_list(&std::fs::read_to_string(p)?);
        }
        Ok(rules)
    }

    /// The label directly left of the longest known public suffix, or the
    /// second-level label when no suffix is known.
    pub fn registrable_label<'h>(&self, host: &'h str) -> Option<&'h str> {
        let host = host.trim_end_matches('.');
        let labels: Vec<&str> = host.split('.').collect();
        if labels.len() < 2 || labels.iter().any(|l| l.is_empty()) {
            return None;
        }
        let suffix_len = (1..labels.len())
            .rev()
            .find(|&k| self.suffixes.contains(&labels[labels.len() - k..].join(".").to_ascii_lowercase()))
            .unwrap_or(1);
        Some(labels[labels.len() - suffix_len - 1])
    }

    pub fn organization_label(&self, host: &str) -> Option<String> {
        let label = self.registrable_label(host)?.to_ascii_lowercase();
        let plausible = label.chars().count() >= 2
            && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
            && label.chars().any(|c| c.is_ascii_alphabetic());
        (plausible && !self.stoplist.contains(&label)).then(|| title_case(&label))
    }
}

fn title_case(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars.flat_map(char::to_lowercase)).collect(),
        None => String::new(),
    }
}

/// Values of a multi-valued field with the char offset each starts at in the
/// newline-joined field text.
fn values_with_offsets(item: &PimItem, kind: FieldKind) -> Vec<(usize, &str)> {
    let mut offset = 0;
    let mut out = Vec::new();
    for v in item.fields.get(&kind).into_iter().flatten() {
        out.push((offset, v.as_str()));
        offset += v.chars().count() + 1;
    }
    out
}

fn char_index(s: &str, byte: usize) -> usize {
    s[..byte].chars().count()
}

fn occurrence(item: &PimItem, kind: FieldKind, base: usize, value: &str, bytes: std::ops::Range<usize>) -> TermOccurrence {
    TermOccurrence {
        item_id: item.id.clone(),
        field_kind: kind,
        char_start: base + char_index(value, bytes.start),
        char_end: base + char_index(value, bytes.end),
        surface: value[bytes].to_string(),
    }
}

fn name_parts<'a>(parts: impl Iterator<Item = &'a str>) -> Vec<String> {
    parts
        .map(str::trim)
        .filter(|p| p.chars().count() >= 2 && p.chars().all(char::is_alphabetic))
        .map(title_case)
        .collect()
}

/// Person name hidden in one address value, with the byte range it was
/// read from.
pub fn person_from_address(value: &str) -> Option<(String, std::ops::Range<usize>)> {
    let (display, addr) = split_address(value);
    if let Some(name) = display {
        let parts = match name.split_once(',') {
            Some((family, given)) => {
                let mut p = name_parts(given.split_whitespace());
                p.extend(name_parts(family.split_whitespace()));
                p
            }
            None => name_parts(name.split_whitespace()),
        };
        if parts.len() >= 2 {
            let start = value.find(name)?;
            return Some((parts.join(" "), start..start + name.len()));
        }
    }
    let local = addr.split('@').next().filter(|l| !l.is_empty() && addr.contains('@'))?;
    let parts = name_parts(local.split(['.', '_', '-']));
    if parts.len() < 2 {
        return None;
    }
    let start = value.rfind(addr)?;
    Some((parts.join(" "), start..start + local.len()))
}

fn merge(into: &mut BTreeMap<String, ConceptCandidate>, label: String, ty: ConceptType, source: CandidateSource, occ: TermOccurrence) {
    into.entry(fold_str(&label))
        .or_insert_with(|| ConceptCandidate { label, concept_type: ty, occurrences: Vec::new(), source })
        .occurrences
        .push(occ);
}

fn finish(map: BTreeMap<String, ConceptCandidate>) -> Vec<ConceptCandidate> {
    map.into_values()
        .map(|mut c| {
            c.occurrences.sort();
            c.occurrences.dedup();
            c
        })
        .collect()
}

/// Persons named in From/To headers, merged by case-folded name.
pub fn extract_persons(corpus: &Corpus) -> Vec<ConceptCandidate> {
    let mut found = BTreeMap::new();
    for item in corpus.items() {
        for kind in [FieldKind::MailFrom, FieldKind::MailTo] {
            for (base, value) in values_with_offsets(item, kind) {
                if let Some((label, span)) = person_from_address(value) {
                    let occ = occurrence(item, kind, base, value, span);
                    merge(&mut found, label, ConceptType::Person, CandidateSource::MailHeader, occ);
                }
            }
        }
    }
    finish(found)
}

/// Gazetteer places in event locations, one candidate per canonical label.
pub fn extract_places(corpus: &Corpus, gazetteer: &Gazetteer) -> Vec<ConceptCandidate> {
    let mut found = BTreeMap::new();
    for item in corpus.items() {
        let Some(text) = item.text(FieldKind::EventLocation) else { continue };
        let chars: Vec<char> = text.chars().collect();
        for (hit, entry) in gazetteer.find(&text, ConceptType::Place) {
            let occ = TermOccurrence {
                item_id: item.id.clone(),
                field_kind: FieldKind::EventLocation,
                char_start: hit.char_start,
                char_end: hit.char_end,
                surface: chars[hit.char_start..hit.char_end].iter().collect(),
            };
            merge(&mut found, entry.label.clone(), ConceptType::Place, CandidateSource::GazetteerLocation, occ);
        }
    }
    finish(found)
}

fn host_of(kind: FieldKind, value: &str) -> Option<String> {
    match kind {
        FieldKind::BookmarkUrl => {
            let url = url::Url::parse(value.trim()).ok()?;
            match url.host()? {
                url::Host::Domain(d) => Some(d.to_string()),
                _ => None,
            }
        }
        _ => {
            let (_, addr) = split_address(value);
            let (_, domain) = addr.rsplit_once('@')?;
            Some(domain.to_string())
        }
    }
}

/// Organizations named by mail domains and bookmark hosts.
pub fn extract_organizations(corpus: &Corpus, rules: &DomainRules) -> Vec<ConceptCandidate> {
    let mut found = BTreeMap::new();
    for item in corpus.items() {
        for kind in [FieldKind::MailFrom, FieldKind::MailTo, FieldKind::BookmarkUrl] {
            for (base, value) in values_with_offsets(item, kind) {
                let Some(host) = host_of(kind, value) else { continue };
                let Some(label) = rules.organization_label(&host) else { continue };
                let Some(raw) = rules.registrable_label(&host) else { continue };
                // Locate the label inside the host as written in the field.
                let lower = value.to_ascii_lowercase();
                let Some(host_at) = lower.rfind(&host.to_ascii_lowercase()) else { continue };
                let host_end = host_at + host.len();
                let Some(label_at) = lower[host_at..host_end].rfind(&format!("{}.", raw.to_ascii_lowercase())) else {
                    continue;
                };
                let start = host_at + label_at;
                let occ = occurrence(item, kind, base, value, start..start + raw.len());
                merge(&mut found, label, ConceptType::Organization, CandidateSource::DomainName, occ);
            }
        }
    }
    finish(found)
}

/// Every case-insensitive, token-bounded occurrence of each label across
/// the free-text fields of the corpus. One automaton serves the whole batch.
pub fn rediscover_all<S: AsRef<str> + Sync>(labels: &[S], corpus: &Corpus) -> Vec<Vec<TermOccurrence>> {
    let matcher = Matcher::new(labels);
    let per_item: Vec<Vec<(usize, TermOccurrence)>> = corpus
        .items()
        .par_iter()
        .map(|item| {
            let mut out = Vec::new();
            for kind in FieldKind::TEXT {
                let Some(text) = item.text(kind) else { continue };
                let hits = matcher.find_all(&text);
                if hits.is_empty() {
                    continue;
                }
                let chars: Vec<char> = text.chars().collect();
                for h in hits {
                    out.push((
                        h.pattern,
                        TermOccurrence {
                            item_id: item.id.clone(),
                            field_kind: kind,
                            char_start: h.char_start,
                            char_end: h.char_end,
                            surface: chars[h.char_start..h.char_end].iter().collect(),
                        },
                    ));
                }
            }
            out
        })
        .collect();
    let mut result = vec![Vec::new(); labels.len()];
    for (pattern, occ) in per_item.into_iter().flatten() {
        result[pattern].push(occ);
    }
    result
}

pub fn rediscover(concept: &ConceptCandidate, corpus: &Corpus) -> Vec<TermOccurrence> {
    rediscover_all(&[concept.label.as_str()], corpus).pop().unwrap_or_default()
}

/// All three extractors over one corpus, persons first.
pub fn extract_all(corpus: &Corpus, gazetteer: &Gazetteer, rules: &DomainRules) -> Vec<ConceptCandidate> {
    let (persons, (places, orgs)) = rayon::join(
        || extract_persons(corpus),
        || rayon::join(|| extract_places(corpus, gazetteer), || extract_organizations(corpus, rules)),
    );
    persons.into_iter().chain(places).chain(orgs).collect()
}
