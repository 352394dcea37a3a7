//! Case-insensitive multi-pattern matching on token boundaries.

use aho_corasick::{AhoCorasick, MatchKind};

/// Lowercased copy of a text plus a map from folded byte offsets back to
/// char offsets in the original.
pub(crate) struct Folded {
    pub text: String,
    /// `char_at[b]` is the original char index whose folded form starts at
    /// byte `b`; `None` inside a multi-byte or multi-char expansion.
    char_at: Vec<Option<usize>>,
    pub chars: Vec<char>,
}

pub(crate) fn fold(text: &str) -> Folded {
    let chars: Vec<char> = text.chars().collect();
    let mut folded = String::with_capacity(text.len());
    let mut char_at = Vec::with_capacity(text.len() + 1);
    for (i, c) in chars.iter().enumerate() {
        let from = folded.len();
        folded.extend(c.to_lowercase());
        char_at.push(Some(i));
        char_at.resize(folded.len(), None);
        debug_assert!(folded.len() > from);
    }
    char_at.push(Some(chars.len()));
    Folded { text: folded, char_at, chars }
}

/// Lowercases a pattern the same way texts are folded.
pub fn fold_str(s: &str) -> String {
    s.chars().flat_map(char::to_lowercase).collect()
}

/// Whether `[start, end)` in `chars` is delimited by non-alphanumerics or
/// the text edges.
pub fn on_boundaries(chars: &[char], start: usize, end: usize) -> bool {
    let before = start == 0 || !chars[start - 1].is_alphanumeric();
    let after = end >= chars.len() || !chars[end].is_alphanumeric();
    before && after
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hit {
    pub char_start: usize,
    pub char_end: usize,
    /// Index of the pattern as passed to [`Matcher::new`].
    pub pattern: usize,
}

/// A batch of labels compiled into one automaton. Run time is linear in the
/// text plus the number of reported hits.
pub struct Matcher {
    ac: Option<AhoCorasick>,
    /// Folded pattern id -> original pattern indices sharing that form.
    groups: Vec<Vec<usize>>,
}

impl Matcher {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Self {
        let mut forms: Vec<String> = Vec::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut by_form = std::collections::HashMap::new();
        for (i, p) in patterns.iter().enumerate() {
            let f = fold_str(p.as_ref().trim());
            if f.is_empty() {
                continue;
            }
            let id = *by_form.entry(f.clone()).or_insert_with(|| {
                forms.push(f);
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[id].push(i);
        }
        let ac = (!forms.is_empty()).then(|| {
            AhoCorasick::builder()
                .match_kind(MatchKind::Standard)
                .build(&forms)
                .expect("patterns compile")
        });
        Matcher { ac, groups }
    }

    /// Every boundary-respecting hit of every pattern, overlaps included,
    /// sorted by position then pattern.
    pub fn find_all(&self, text: &str) -> Vec<Hit> {
        let Some(ac) = &self.ac else { return Vec::new() };
        let folded = fold(text);
        let mut hits = Vec::new();
        for m in ac.find_overlapping_iter(&folded.text) {
            let (Some(start), Some(end)) = (folded.char_at[m.start()], folded.char_at[m.end()]) else {
                continue;
            };
            if start == end || !on_boundaries(&folded.chars, start, end) {
                continue;
            }
            for &pattern in &self.groups[m.pattern().as_usize()] {
                hits.push(Hit { char_start: start, char_end: end, pattern });
            }
        }
        hits.sort_unstable();
        hits.dedup();
        hits
    }
}

/// Keeps the longest hit at each position and drops anything overlapping
/// an earlier kept hit. Hits of equal span are all kept.
pub fn longest_non_overlapping(mut hits: Vec<Hit>) -> Vec<Hit> {
    hits.sort_by(|a, b| {
        a.char_start
            .cmp(&b.char_start)
            .then(b.char_end.cmp(&a.char_end))
            .then(a.pattern.cmp(&b.pattern))
    });
    let mut kept: Vec<Hit> = Vec::new();
    let mut frontier = 0usize;
    for h in hits {
        let same_span = kept
            .last()
            .is_some_and(|k| k.char_start == h.char_start && k.char_end == h.char_end);
        if same_span || h.char_start >= frontier {
            frontier = frontier.max(h.char_end);
            kept.push(h);
        }
    }
    kept
}
