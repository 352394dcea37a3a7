use std::collections::{btree_map, BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize, Token, TokenClass};
use crate::model::{Corpus, FieldKind, ItemId, PimItem, Silo, TermOccurrence, TermRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexOptions {
    /// Also index bigrams and trigrams of adjacent words.
    pub ngrams: bool,
}

/// All candidate terms of a corpus keyed by their lowercase form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TermIndex {
    corpus_ref: String,
    options: IndexOptions,
    terms: BTreeMap<String, TermRecord>,
}

impl TermIndex {
    pub fn corpus_ref(&self) -> &str {
        &self.corpus_ref
    }

    pub fn options(&self) -> IndexOptions {
        self.options
    }

    pub fn get(&self, key: &str) -> Option<&TermRecord> {
        self.terms.get(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.terms.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(String::as_str)
    }

    pub fn records(&self) -> btree_map::Values<'_, String, TermRecord> {
        self.terms.values()
    }

    pub(crate) fn records_mut(&mut self) -> btree_map::ValuesMut<'_, String, TermRecord> {
        self.terms.values_mut()
    }
}

impl TermRecord {
    /// Distinct items the term occurs in, in first-occurrence order.
    pub fn item_ids(&self) -> Vec<&ItemId> {
        let mut seen = BTreeSet::new();
        self.occurrences
            .iter()
            .map(|o| &o.item_id)
            .filter(|id| seen.insert(*id))
            .collect()
    }

    pub fn silos(&self) -> BTreeSet<Silo> {
        self.occurrences.iter().map(|o| o.field_kind.silo()).collect()
    }
}

/// Term occurrences found in one field of one item, in document order.
pub fn field_terms(text: &str, ngrams: bool) -> Vec<(String, Token<'_>)> {
    let tokens = tokenize(text);
    let mut out: Vec<(String, Token<'_>)> = tokens
        .iter()
        .filter(|t| t.is_term_candidate())
        .map(|t| (t.key(), t.clone()))
        .collect();
    if ngrams {
        add_ngrams(text, &tokens, &mut out);
        out.sort_by_key(|(_, t)| (t.char_start, t.char_end));
    }
    out
}

fn add_ngrams<'a>(text: &'a str, tokens: &[Token<'a>], out: &mut Vec<(String, Token<'a>)>) {
    let words_adjacent = |a: &Token<'_>, b: &Token<'_>| {
        a.class == TokenClass::Word
            && b.class == TokenClass::Word
            && b.char_start == a.char_end + 1
    };
    let char_to_byte: Vec<usize> = text
        .char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(text.len()))
        .collect();
    for n in 2..=3 {
        for window in tokens.windows(n) {
            let chained = window.windows(2).all(|p| words_adjacent(&p[0], &p[1]))
                && window.iter().all(|t| t.is_term_candidate());
            if !chained {
                continue;
            }
            let (first, last) = (&window[0], &window[n - 1]);
            let from = char_to_byte[first.char_start];
            let to = char_to_byte[last.char_end];
            // Only a single plain space may separate the words.
            if text[from..to].chars().any(|c| c.is_whitespace() && c != ' ') {
                continue;
            }
            let surface = &text[from..to];
            out.push((
                surface.to_lowercase(),
                Token {
                    surface,
                    char_start: first.char_start,
                    char_end: last.char_end,
                    class: TokenClass::Word,
                },
            ));
        }
    }
}

fn item_occurrences(item: &PimItem, ngrams: bool) -> Vec<(String, TermOccurrence)> {
    let mut out = Vec::new();
    for kind in FieldKind::TEXT {
        let Some(text) = item.text(kind) else { continue };
        for (key, token) in field_terms(&text, ngrams) {
            out.push((
                key,
                TermOccurrence {
                    item_id: item.id.clone(),
                    field_kind: kind,
                    char_start: token.char_start,
                    char_end: token.char_end,
                    surface: token.surface.to_string(),
                },
            ));
        }
    }
    out
}

/// Tokenizes the free-text fields of every item and groups the word and
/// mixed tokens by lowercase key. Number and symbol tokens are discarded.
pub fn build_term_index(corpus: &Corpus, options: IndexOptions) -> TermIndex {
    let per_item: Vec<Vec<(String, TermOccurrence)>> = corpus
        .items()
        .par_iter()
        .map(|item| item_occurrences(item, options.ngrams))
        .collect();
    let mut terms: BTreeMap<String, TermRecord> = BTreeMap::new();
    for (key, occ) in per_item.into_iter().flatten() {
        let record = terms.entry(key).or_insert_with_key(|k| TermRecord::new(k.clone()));
        *record.surfaces.entry(occ.surface.clone()).or_default() += 1;
        record.occurrences.push(occ);
    }
    TermIndex {
        corpus_ref: corpus.content_hash(),
        options,
        terms,
    }
}
