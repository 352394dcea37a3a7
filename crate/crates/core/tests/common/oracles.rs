//! Brute-force reference implementations. Deliberately slow and simple.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use pim_concept_miner::links::copy_tokens;
use pim_concept_miner::metrics::{Metric, MetricCombination};
use pim_concept_miner::model::{Authorship, Corpus, FieldKind, ItemId, Silo, TermOccurrence};
use pim_concept_miner::textprep::tokenize;
use pim_concept_miner::triage::{SiloCoverage, Status};

const EPS: f64 = 1e-9;

struct NaiveTerm {
    surfaces: Vec<String>,
    items: BTreeSet<ItemId>,
    silos: BTreeSet<Silo>,
    user_fields: usize,
}

/// Scores every term by re-tokenizing the corpus and applying the metric
/// definitions directly, then sorts by score, count and key.
pub fn naive_rank(corpus: &Corpus, c: &MetricCombination) -> Vec<(String, f64, usize)> {
    let mut terms: BTreeMap<String, NaiveTerm> = BTreeMap::new();
    for item in corpus.items() {
        for field in FieldKind::TEXT {
            let Some(text) = item.text(field) else { continue };
            for tok in tokenize(&text) {
                if !tok.is_term_candidate() {
                    continue;
                }
                let t = terms.entry(tok.surface.to_lowercase()).or_insert_with(|| NaiveTerm {
                    surfaces: vec![],
                    items: BTreeSet::new(),
                    silos: BTreeSet::new(),
                    user_fields: 0,
                });
                t.surfaces.push(tok.surface.to_string());
                t.items.insert(item.id.clone());
                t.silos.insert(item.silo);
                if field.authorship() == Authorship::UserAuthored {
                    t.user_fields += 1;
                }
            }
        }
    }
    let n_items = corpus.len() as f64;
    let max_count = terms.values().map(|t| t.surfaces.len()).max().unwrap_or(0) as f64;

    // minimum depth of a folder whose name (or one of its name tokens) is the key
    let mut depth: HashMap<String, usize> = HashMap::new();
    for silo in Silo::ALL {
        let mut paths: BTreeSet<Vec<String>> = BTreeSet::new();
        for item in corpus.items().iter().filter(|i| i.silo == silo) {
            for d in 1..=item.folder_path.len() {
                paths.insert(item.folder_path[..d].to_vec());
            }
        }
        for p in paths {
            let name = p.last().unwrap();
            let mut keys: Vec<String> = tokenize(name)
                .into_iter()
                .filter(|t| t.is_term_candidate())
                .map(|t| t.surface.to_lowercase())
                .collect();
            keys.push(name.to_lowercase());
            for k in keys {
                let e = depth.entry(k).or_insert(p.len());
                *e = (*e).min(p.len());
            }
        }
    }

    let clamp = |v: f64| v.clamp(EPS, 1.0);
    let mut out: Vec<(String, f64, usize)> = terms
        .into_iter()
        .map(|(key, t)| {
            let count = t.surfaces.len();
            let df = t.items.len() as f64 / n_items;
            let len = key.chars().count();
            let upper = t
                .surfaces
                .iter()
                .filter(|s| s.chars().any(|c| c.is_alphabetic()) && s.chars().all(|c| !c.is_lowercase()))
                .count();
            let acronym = (2..=6).contains(&len) && !key.contains(char::is_whitespace) && upper as f64 >= 0.9 * count as f64;
            let value = |m: Metric| -> f64 {
                clamp(match m {
                    Metric::Tf => count as f64 / max_count,
                    Metric::Df => df,
                    Metric::SiloSpread => t.silos.len() as f64 / 3.0,
                    Metric::Generality => depth.get(&key).map_or(0.0, |d| 1.0 / *d as f64),
                    Metric::UserFieldRatio => t.user_fields as f64 / count as f64,
                    Metric::AcronymScore => {
                        if acronym {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    Metric::LengthScore => len.min(12) as f64 / 12.0,
                    Metric::Rarity => 1.0 - df,
                })
            };
            // (sum w) / (sum w/v), summed in ascending order of the parts so
            // equal vectors give bit-identical scores
            let total: f64 = c.weights.values().filter(|w| **w > 0.0).sum();
            let mut parts: Vec<f64> = c
                .weights
                .iter()
                .filter(|(_, w)| **w > 0.0)
                .map(|(m, w)| (w / total) / value(*m))
                .collect();
            parts.sort_by(f64::total_cmp);
            (key, 1.0 / parts.iter().sum::<f64>(), count)
        })
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.2.cmp(&a.2)).then(a.0.cmp(&b.0)));
    out
}

/// Covered items per silo by scanning every item for a promising token.
pub fn naive_coverage(corpus: &Corpus, status: impl Fn(&str) -> Status) -> BTreeMap<Silo, SiloCoverage> {
    let mut out: BTreeMap<Silo, SiloCoverage> = Silo::ALL.map(|s| (s, SiloCoverage::default())).into();
    for item in corpus.items() {
        let covered = FieldKind::TEXT.iter().any(|f| {
            item.text(*f).is_some_and(|text| {
                tokenize(&text)
                    .iter()
                    .filter(|t| t.is_term_candidate())
                    .any(|t| status(&t.surface.to_lowercase()) == Status::Promising)
            })
        });
        let e = out.get_mut(&item.silo).unwrap();
        e.total += 1;
        if covered {
            e.covered += 1;
        } else {
            e.uncovered += 1;
        }
    }
    out
}

fn lower(s: &[char]) -> String {
    s.iter().flat_map(|c| c.to_lowercase()).collect()
}

/// Every char range of `text` whose lowercase form equals the lowercase
/// label and which is not flanked by letters or digits.
pub fn naive_find(text: &str, label: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let want: String = label.trim().chars().flat_map(|c| c.to_lowercase()).collect();
    if want.is_empty() {
        return vec![];
    }
    let mut out = vec![];
    for i in 0..chars.len() {
        for j in i + 1..=chars.len() {
            if lower(&chars[i..j]) != want {
                continue;
            }
            let left = i == 0 || !chars[i - 1].is_alphanumeric();
            let right = j == chars.len() || !chars[j].is_alphanumeric();
            if left && right {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn naive_rediscover(corpus: &Corpus, label: &str) -> Vec<TermOccurrence> {
    let mut out = vec![];
    for item in corpus.items() {
        for field in FieldKind::TEXT {
            let Some(text) = item.text(field) else { continue };
            let chars: Vec<char> = text.chars().collect();
            for (s, e) in naive_find(&text, label) {
                out.push(TermOccurrence {
                    item_id: item.id.clone(),
                    field_kind: field,
                    char_start: s,
                    char_end: e,
                    surface: chars[s..e].iter().collect(),
                });
            }
        }
    }
    out
}

/// Longest common contiguous token run of every cross-silo item pair, by
/// dynamic programming over all field pairs. Keys are (smaller id, larger id).
pub fn naive_copied(corpus: &Corpus, min_tokens: usize) -> BTreeMap<(ItemId, ItemId), usize> {
    let items = corpus.items();
    let runs: Vec<_> = items.iter().map(copy_tokens).collect();
    let mut out = BTreeMap::new();
    for a in 0..items.len() {
        for b in a + 1..items.len() {
            if items[a].silo == items[b].silo {
                continue;
            }
            let mut best = 0;
            for ra in &runs[a] {
                for rb in &runs[b] {
                    let (x, y) = (&ra.keys, &rb.keys);
                    let mut prev = vec![0usize; y.len() + 1];
                    for i in 1..=x.len() {
                        let mut cur = vec![0usize; y.len() + 1];
                        for j in 1..=y.len() {
                            if x[i - 1] == y[j - 1] {
                                cur[j] = prev[j - 1] + 1;
                                best = best.max(cur[j]);
                            }
                        }
                        prev = cur;
                    }
                }
            }
            if best >= min_tokens {
                let (p, q) = if items[a].id <= items[b].id { (a, b) } else { (b, a) };
                out.insert((items[p].id.clone(), items[q].id.clone()), best);
            }
        }
    }
    out
}

/// Gazetteer lookup by brute force: every boundary-checked hit of every
/// label, then hits in (start, longest first, label) order are kept when they
/// are disjoint from all kept hits or repeat a kept span exactly.
pub fn naive_gazetteer(labels: &[&str], text: &str) -> Vec<(usize, usize, usize)> {
    let mut hits: Vec<(usize, usize, usize)> = vec![];
    for (n, label) in labels.iter().enumerate() {
        for (s, e) in naive_find(text, label) {
            hits.push((s, e, n));
        }
    }
    hits.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    let mut kept: Vec<(usize, usize, usize)> = vec![];
    for h in hits {
        let ok = kept.iter().all(|k| (k.0, k.1) == (h.0, h.1) || h.1 <= k.0 || h.0 >= k.1);
        if ok {
            kept.push(h);
        }
    }
    kept
}
