//! Cross-silo relations: dates in mails that fall on calendar events, URLs
//! shared between mails and bookmarks, and text copied from one silo to
//! another.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::model::{Corpus, FieldKind, ItemId, PimItem, Silo, TermOccurrence};
use crate::textprep::{tokenize, TokenClass};

pub const DEFAULT_MIN_TOKENS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LinkKind {
    Temporal,
    SharedUrl,
    CopiedText,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Temporal => "temporal",
            LinkKind::SharedUrl => "sharedUrl",
            LinkKind::CopiedText => "copiedText",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [LinkKind::Temporal, LinkKind::SharedUrl, LinkKind::CopiedText]
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(name.trim()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CrossLink {
    pub kind: LinkKind,
    pub from_item: ItemId,
    pub to_item: ItemId,
    /// Spans supporting the link; for copied text one span per side.
    pub evidence: Vec<TermOccurrence>,
    /// The matched date (`YYYY-MM-DD`), the normalized URL, or the length of
    /// the shared run in tokens.
    pub detail: String,
}

impl CrossLink {
    /// Length of the shared token run of a copied-text link.
    pub fn run_tokens(&self) -> Option<usize> {
        (self.kind == LinkKind::CopiedText).then(|| self.detail.parse().ok()).flatten()
    }
}

fn occurrence(item: &PimItem, kind: FieldKind, chars: &[char], start: usize, end: usize) -> TermOccurrence {
    TermOccurrence {
        item_id: item.id.clone(),
        field_kind: kind,
        char_start: start,
        char_end: end,
        surface: chars[start..end].iter().collect(),
    }
}

fn char_offsets(text: &str) -> impl Fn(usize) -> usize + '_ {
    move |byte| text[..byte].chars().count()
}

// ---- dates ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateMention {
    pub date: NaiveDate,
    pub char_start: usize,
    pub char_end: usize,
}

fn months() -> &'static HashMap<String, u32> {
    static MONTHS: OnceLock<HashMap<String, u32>> = OnceLock::new();
    MONTHS.get_or_init(|| {
        include_str!("../data/months.tsv")
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .filter_map(|l| {
                let (name, n) = l.split_once('\t')?;
                Some((name.trim().to_lowercase(), n.trim().parse().ok()?))
            })
            .collect()
    })
}

struct DatePatterns {
    day_month: Regex,
    month_day: Regex,
    dotted: Regex,
    iso: Regex,
    slashed: Regex,
}

fn patterns() -> &'static DatePatterns {
    static PATTERNS: OnceLock<DatePatterns> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        let mut names: Vec<&str> = months().keys().map(String::as_str).collect();
        names.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        let alt = names.iter().map(|n| regex::escape(n)).collect::<Vec<_>>().join("|");
        let year = r"(?:,?\s+(\d{4})\b)?";
        DatePatterns {
            day_month: Regex::new(&format!(
                r"(?i)\b(\d{{1,2}})(?:st|nd|rd|th|\.)?\s+(?:of\s+)?({alt})\b\.?{year}"
            ))
            .unwrap(),
            month_day: Regex::new(&format!(r"(?i)\b({alt})\.?\s+(\d{{1,2}})(?:st|nd|rd|th)?\b{year}")).unwrap(),
            dotted: Regex::new(r"\b(\d{1,2})\.(\d{1,2})\.(\d{4})\b").unwrap(),
            iso: Regex::new(r"\b(\d{4})-(\d{2})-(\d{2})\b").unwrap(),
            slashed: Regex::new(r"\b(\d{1,2})/(\d{1,2})/(\d{4})\b").unwrap(),
        }
    })
}

/// The valid date with the given month and day closest to `reference`,
/// looking one year back and ahead. Ties go to the later date.
pub fn resolve_yearless(month: u32, day: u32, reference: NaiveDate) -> Option<NaiveDate> {
    let y = reference.year();
    [y + 1, y, y - 1]
        .into_iter()
        .filter_map(|year| NaiveDate::from_ymd_opt(year, month, day))
        .min_by_key(|d| (*d - reference).num_days().abs())
}

/// Dates mentioned in `text`. Mentions without a year are placed nearest to
/// `reference`. Impossible dates are dropped.
pub fn detect_date_mentions(text: &str, reference: NaiveDate) -> Vec<DateMention> {
    let p = patterns();
    let m = months();
    let num = |c: Option<regex::Match<'_>>| c.and_then(|c| c.as_str().parse::<u32>().ok());
    let date = |year: Option<u32>, month: u32, day: u32| match year {
        Some(y) => NaiveDate::from_ymd_opt(y as i32, month, day),
        None => resolve_yearless(month, day, reference),
    };

    let mut found: Vec<(usize, usize, NaiveDate)> = Vec::new();
    let mut push = |start: usize, end: usize, d: Option<NaiveDate>| {
        if let Some(d) = d {
            found.push((start, end, d));
        }
    };
    for c in p.day_month.captures_iter(text) {
        let whole = c.get(0).unwrap();
        let month = m.get(&c[2].to_lowercase()).copied();
        push(whole.start(), whole.end(), month.and_then(|mo| date(num(c.get(3)), mo, num(c.get(1))?)));
    }
    for c in p.month_day.captures_iter(text) {
        let whole = c.get(0).unwrap();
        let month = m.get(&c[1].to_lowercase()).copied();
        push(whole.start(), whole.end(), month.and_then(|mo| date(num(c.get(3)), mo, num(c.get(2))?)));
    }
    for (re, order) in [(&p.dotted, [3, 2, 1]), (&p.iso, [1, 2, 3]), (&p.slashed, [3, 2, 1])] {
        for c in re.captures_iter(text) {
            let whole = c.get(0).unwrap();
            let [y, mo, d] = order.map(|i| num(c.get(i)));
            push(whole.start(), whole.end(), y.zip(mo).zip(d).and_then(|((y, mo), d)| date(Some(y), mo, d)));
        }
    }

    // Longest mention wins where patterns overlap.
    found.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    let to_char = char_offsets(text);
    let mut out = Vec::new();
    let mut frontier = 0;
    for (start, end, date) in found {
        if start < frontier {
            continue;
        }
        frontier = end;
        out.push(DateMention { date, char_start: to_char(start), char_end: to_char(end) });
    }
    out
}

/// Links each mail to every event that starts on a date the mail mentions.
pub fn link_temporal(corpus: &Corpus) -> Vec<CrossLink> {
    let mut events_by_day: BTreeMap<NaiveDate, Vec<&PimItem>> = BTreeMap::new();
    for item in corpus.items().iter().filter(|i| i.silo == Silo::Calendar) {
        if let Some(ts) = item.timestamp {
            events_by_day.entry(ts.date_naive()).or_default().push(item);
        }
    }
    if events_by_day.is_empty() {
        return Vec::new();
    }
    let mut links = Vec::new();
    for mail in corpus.items().iter().filter(|i| i.silo == Silo::Mail) {
        let Some(reference) = mail.timestamp.map(|t| t.date_naive()) else { continue };
        let mut per_event: BTreeMap<(&ItemId, NaiveDate), Vec<TermOccurrence>> = BTreeMap::new();
        for kind in [FieldKind::MailSubject, FieldKind::MailBody] {
            let Some(text) = mail.text(kind) else { continue };
            let chars: Vec<char> = text.chars().collect();
            for mention in detect_date_mentions(&text, reference) {
                for event in events_by_day.get(&mention.date).into_iter().flatten() {
                    per_event
                        .entry((&event.id, mention.date))
                        .or_default()
                        .push(occurrence(mail, kind, &chars, mention.char_start, mention.char_end));
                }
            }
        }
        for ((event, date), evidence) in per_event {
            links.push(CrossLink {
                kind: LinkKind::Temporal,
                from_item: mail.id.clone(),
                to_item: event.clone(),
                evidence,
                detail: date.to_string(),
            });
        }
    }
    links
}

// ---- URLs ----

fn url_pattern() -> &'static Regex {
    static URL: OnceLock<Regex> = OnceLock::new();
    URL.get_or_init(|| Regex::new(r#"(?i)\bhttps?://[^\s<>"'\[\]{}|\\^`]+"#).unwrap())
}

/// Lowercase scheme and host, no fragment, no trailing slash.
pub fn normalize_url(raw: &str) -> Option<String> {
    let mut url = url::Url::parse(raw.trim()).ok()?;
    url.host_str()?;
    url.set_fragment(None);
    let s = url.to_string();
    Some(s.trim_end_matches('/').to_string())
}

/// URLs in `text` with their char spans, trailing punctuation removed.
pub fn find_urls(text: &str) -> Vec<(String, usize, usize)> {
    let to_char = char_offsets(text);
    url_pattern()
        .find_iter(text)
        .filter_map(|m| {
            let s = m.as_str().trim_end_matches(['.', ',', ';', ':', '!', '?', ')', '>']);
            let end = m.start() + s.len();
            Some((normalize_url(s)?, to_char(m.start()), to_char(end)))
        })
        .collect()
}

/// Links mails to bookmarks of a URL that appears in the mail body.
pub fn link_shared_urls(corpus: &Corpus) -> Vec<CrossLink> {
    let mut bookmarks: HashMap<String, Vec<&ItemId>> = HashMap::new();
    for item in corpus.items().iter().filter(|i| i.silo == Silo::Bookmark) {
        for raw in item.fields.get(&FieldKind::BookmarkUrl).into_iter().flatten() {
            if let Some(url) = normalize_url(raw) {
                bookmarks.entry(url).or_default().push(&item.id);
            }
        }
    }
    let mut links = Vec::new();
    for mail in corpus.items().iter().filter(|i| i.silo == Silo::Mail) {
        let Some(body) = mail.text(FieldKind::MailBody) else { continue };
        let chars: Vec<char> = body.chars().collect();
        let mut per_target: BTreeMap<(&ItemId, String), Vec<TermOccurrence>> = BTreeMap::new();
        for (url, start, end) in find_urls(&body) {
            for target in bookmarks.get(&url).into_iter().flatten() {
                per_target
                    .entry((target, url.clone()))
                    .or_default()
                    .push(occurrence(mail, FieldKind::MailBody, &chars, start, end));
            }
        }
        for ((target, url), evidence) in per_target {
            links.push(CrossLink {
                kind: LinkKind::SharedUrl,
                from_item: mail.id.clone(),
                to_item: target.clone(),
                evidence,
                detail: url,
            });
        }
    }
    links
}

// ---- copied text ----

/// Case-folded word, number and mixed tokens of a field with their char
/// spans. Symbol tokens are skipped so punctuation changes do not break a run.
#[derive(Debug, Clone)]
pub struct TokenRun {
    pub field: FieldKind,
    pub keys: Vec<String>,
    pub spans: Vec<(usize, usize)>,
}

pub fn copy_tokens(item: &PimItem) -> Vec<TokenRun> {
    FieldKind::TEXT
        .into_iter()
        .filter_map(|field| {
            let text = item.text(field)?;
            let (keys, spans) = tokenize(&text)
                .into_iter()
                .filter(|t| t.class != TokenClass::Symbol)
                .map(|t| (t.key(), (t.char_start, t.char_end)))
                .unzip();
            Some(TokenRun { field, keys, spans })
        })
        .collect()
}

/// Best shared run found for an item pair: length, then position of the
/// run on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Run {
    len: usize,
    a: (usize, usize),
    b: (usize, usize),
}

fn better(new: Run, old: Option<Run>) -> bool {
    old.is_none_or(|o| new.len > o.len || (new.len == o.len && (new.a, new.b) < (o.a, o.b)))
}

fn shingle_hash(window: &[String]) -> u64 {
    let mut h = DefaultHasher::new();
    window.hash(&mut h);
    h.finish()
}

/// Links items of different silos that share a run of at least
/// `min_tokens` identical tokens. Each pair is linked once, smaller id
/// first, carrying its longest run.
pub fn link_copied_text(corpus: &Corpus, min_tokens: usize) -> Vec<CrossLink> {
    let min_tokens = min_tokens.max(1);
    let items = corpus.items();
    let runs: Vec<Vec<TokenRun>> = items.par_iter().map(copy_tokens).collect();

    // shingle hash -> (item, field run, position)
    let mut postings: HashMap<u64, Vec<(usize, usize, usize)>> = HashMap::new();
    for (i, item_runs) in runs.iter().enumerate() {
        for (f, run) in item_runs.iter().enumerate() {
            for (pos, window) in run.keys.windows(min_tokens).enumerate() {
                postings.entry(shingle_hash(window)).or_default().push((i, f, pos));
            }
        }
    }

    let mut best: HashMap<(usize, usize), Run> = HashMap::new();
    for list in postings.values() {
        for (x, &(i, fi, pi)) in list.iter().enumerate() {
            for &(j, fj, pj) in &list[x + 1..] {
                if i == j || items[i].silo == items[j].silo {
                    continue;
                }
                // Orient the pair so `a` is the item with the smaller id.
                let ((a, fa, pa), (b, fb, pb)) = if items[i].id <= items[j].id {
                    ((i, fi, pi), (j, fj, pj))
                } else {
                    ((j, fj, pj), (i, fi, pi))
                };
                let ka = &runs[a][fa].keys;
                let kb = &runs[b][fb].keys;
                if ka[pa..pa + min_tokens] != kb[pb..pb + min_tokens] {
                    continue;
                }
                // Only maximal runs are measured, from their first shingle.
                if pa > 0 && pb > 0 && ka[pa - 1] == kb[pb - 1] {
                    continue;
                }
                let mut len = min_tokens;
                while pa + len < ka.len() && pb + len < kb.len() && ka[pa + len] == kb[pb + len] {
                    len += 1;
                }
                let run = Run { len, a: (fa, pa), b: (fb, pb) };
                let slot = best.get(&(a, b)).copied();
                if better(run, slot) {
                    best.insert((a, b), run);
                }
            }
        }
    }

    let mut links: Vec<CrossLink> = best
        .into_iter()
        .map(|((a, b), run)| {
            let side = |idx: usize, (f, p): (usize, usize)| {
                let tr = &runs[idx][f];
                let text = items[idx].text(tr.field).unwrap_or_default();
                let chars: Vec<char> = text.chars().collect();
                occurrence(&items[idx], tr.field, &chars, tr.spans[p].0, tr.spans[p + run.len - 1].1)
            };
            CrossLink {
                kind: LinkKind::CopiedText,
                from_item: items[a].id.clone(),
                to_item: items[b].id.clone(),
                evidence: vec![side(a, run.a), side(b, run.b)],
                detail: run.len.to_string(),
            }
        })
        .collect();
    links.sort_by(|x, y| (&x.from_item, &x.to_item).cmp(&(&y.from_item, &y.to_item)));
    links
}

/// All three linkers; output grouped by kind.
pub fn link_all(corpus: &Corpus, min_tokens: usize) -> Vec<CrossLink> {
    let (temporal, (urls, copied)) = rayon::join(
        || link_temporal(corpus),
        || rayon::join(|| link_shared_urls(corpus), || link_copied_text(corpus, min_tokens)),
    );
    temporal.into_iter().chain(urls).chain(copied).collect()
}
