//! Per-term metric vectors and the weighted harmonic-mean ranking.
//!
//! Every metric is normalized into `[EPSILON, 1]`. A combination assigns
//! non-negative weights to metrics; the score of a term is the weighted
//! harmonic mean of its selected metric values,
//!
//! ```text
//! score = Σ wᵢ / Σ (wᵢ / vᵢ)        over metrics with wᵢ > 0
//! ```
//!
//! so a single weak metric pulls the score down hard.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{Authorship, Corpus, TermRecord};
use crate::textprep::{tokenize, TermIndex};

/// Lower clamp for metric values; keeps the harmonic mean defined.
pub const EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Metric {
    Tf,
    Df,
    SiloSpread,
    Generality,
    UserFieldRatio,
    AcronymScore,
    LengthScore,
    Rarity,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Tf,
        Metric::Df,
        Metric::SiloSpread,
        Metric::Generality,
        Metric::UserFieldRatio,
        Metric::AcronymScore,
        Metric::LengthScore,
        Metric::Rarity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Tf => "tf",
            Metric::Df => "df",
            Metric::SiloSpread => "siloSpread",
            Metric::Generality => "generality",
            Metric::UserFieldRatio => "userFieldRatio",
            Metric::AcronymScore => "acronymScore",
            Metric::LengthScore => "lengthScore",
            Metric::Rarity => "rarity",
        }
    }

    pub fn from_name(name: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(name.trim()))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricVector {
    pub tf: f64,
    pub df: f64,
    pub silo_spread: f64,
    pub generality: f64,
    pub user_field_ratio: f64,
    pub acronym_score: f64,
    pub length_score: f64,
    pub rarity: f64,
}

impl MetricVector {
    /// Builds a vector from values in [`Metric::ALL`] order, clamped.
    pub fn from_values(values: [f64; 8]) -> Self {
        let c = values.map(clamp);
        MetricVector {
            tf: c[0],
            df: c[1],
            silo_spread: c[2],
            generality: c[3],
            user_field_ratio: c[4],
            acronym_score: c[5],
            length_score: c[6],
            rarity: c[7],
        }
    }

    pub fn values(&self) -> [f64; 8] {
        Metric::ALL.map(|m| self.get(m))
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Tf => self.tf,
            Metric::Df => self.df,
            Metric::SiloSpread => self.silo_spread,
            Metric::Generality => self.generality,
            Metric::UserFieldRatio => self.user_field_ratio,
            Metric::AcronymScore => self.acronym_score,
            Metric::LengthScore => self.length_score,
            Metric::Rarity => self.rarity,
        }
    }
}

fn clamp(v: f64) -> f64 {
    if v.is_nan() {
        EPSILON
    } else {
        v.clamp(EPSILON, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("term not in index: {0}")]
    TermNotInIndex(String),
    #[error("invalid metric combination: {0}")]
    InvalidCombination(String),
}

/// A named weight vector over metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCombination {
    pub name: String,
    pub weights: BTreeMap<Metric, f64>,
}

impl MetricCombination {
    pub fn new(name: impl Into<String>, weights: impl IntoIterator<Item = (Metric, f64)>) -> Self {
        MetricCombination {
            name: name.into(),
            weights: weights.into_iter().collect(),
        }
    }

    /// Builds and validates a combination from metric names.
    pub fn from_named<S: AsRef<str>>(
        name: impl Into<String>,
        weights: impl IntoIterator<Item = (S, f64)>,
    ) -> Result<Self, MetricsError> {
        let mut out = BTreeMap::new();
        for (metric, w) in weights {
            let m = Metric::from_name(metric.as_ref()).ok_or_else(|| {
                MetricsError::InvalidCombination(format!("unknown metric {:?}", metric.as_ref()))
            })?;
            out.insert(m, w);
        }
        let c = MetricCombination { name: name.into(), weights: out };
        c.validate()?;
        Ok(c)
    }

    /// Parses `k=v,k=v` weight lists.
    pub fn parse_weights(spec: &str) -> Result<Self, MetricsError> {
        let mut pairs = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| MetricsError::InvalidCombination(format!("expected name=weight, got {part:?}")))?;
            let w: f64 = v
                .trim()
                .parse()
                .map_err(|_| MetricsError::InvalidCombination(format!("bad weight {v:?}")))?;
            pairs.push((k.trim().to_string(), w));
        }
        Self::from_named("custom", pairs)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if let Some((m, w)) = self.weights.iter().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(MetricsError::InvalidCombination(format!("weight of {m} must be a non-negative number, got {w}")));
        }
        if !self.weights.values().any(|w| *w > 0.0) {
            return Err(MetricsError::InvalidCombination("all weights are zero".into()));
        }
        Ok(())
    }

    /// Canonical cache key: identical for identical weights.
    pub fn cache_key(&self) -> String {
        serde_json::to_string(&self.weights).expect("weights serialize")
    }
}

/// Weighted harmonic mean of the selected metric values.
pub fn harmonic_score(v: &MetricVector, c: &MetricCombination) -> Result<f64, MetricsError> {
    c.validate()?;
    Ok(harmonic_unchecked(v, c))
}

fn harmonic_unchecked(v: &MetricVector, c: &MetricCombination) -> f64 {
    let total: f64 = c.weights.values().filter(|w| **w > 0.0).sum();
    let mut parts: [f64; 8] = [0.0; 8];
    let mut n = 0;
    for (&metric, &w) in c.weights.iter().filter(|(_, w)| **w > 0.0) {
        parts[n] = (w / total) / clamp(v.get(metric));
        n += 1;
    }
    // Summing in sorted order makes the result independent of which metric
    // contributed which part.
    parts[..n].sort_by(f64::total_cmp);
    1.0 / parts[..n].iter().sum::<f64>()
}

/// The presets shipped with the tool.
pub fn presets() -> Vec<MetricCombination> {
    use Metric::*;
    vec![
        MetricCombination::new("balanced", Metric::ALL.map(|m| (m, 1.0))),
        MetricCombination::new("acronyms & projects", [(AcronymScore, 3.0), (SiloSpread, 2.0), (Rarity, 1.0)]),
        MetricCombination::new("frequent topics", [(Tf, 2.0), (Df, 2.0), (LengthScore, 1.0)]),
        MetricCombination::new("folder concepts", [(Generality, 3.0), (UserFieldRatio, 2.0)]),
    ]
}

pub fn preset(name: &str) -> Option<MetricCombination> {
    presets().into_iter().find(|p| p.name.eq_ignore_ascii_case(name.trim()))
}

/// Corpus-wide quantities shared by all metric computations.
pub struct MetricContext {
    item_count: usize,
    max_count: usize,
    folder_depth: HashMap<String, usize>,
}

impl MetricContext {
    pub fn new(corpus: &Corpus, index: &TermIndex) -> Self {
        let mut folder_depth: HashMap<String, usize> = HashMap::new();
        for tree in corpus.folder_trees().values() {
            tree.walk(&mut |node, depth| {
                let whole = node.name.to_lowercase();
                let keys = tokenize(&node.name)
                    .into_iter()
                    .filter(|t| t.is_term_candidate())
                    .map(|t| t.key())
                    .chain(std::iter::once(whole));
                for key in keys {
                    let slot = folder_depth.entry(key).or_insert(depth);
                    *slot = (*slot).min(depth);
                }
            });
        }
        MetricContext {
            item_count: corpus.len(),
            max_count: index.records().map(TermRecord::count).max().unwrap_or(0),
            folder_depth,
        }
    }

    pub fn vector(&self, term: &TermRecord) -> MetricVector {
        let count = term.count();
        let df_raw = term.item_ids().len();
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let df = ratio(df_raw, self.item_count);
        let generality = self.folder_depth.get(&term.key).map_or(0.0, |&d| 1.0 / d as f64);
        let user = term
            .occurrences
            .iter()
            .filter(|o| o.field_kind.authorship() == Authorship::UserAuthored)
            .count();
        let len = term.key.chars().count();
        MetricVector::from_values([
            ratio(count, self.max_count),
            df,
            term.silos().len() as f64 / 3.0,
            generality,
            ratio(user, count),
            if is_acronym(term) { 1.0 } else { 0.0 },
            len.min(12) as f64 / 12.0,
            1.0 - df,
        ])
    }
}

/// Acronym candidate: 2 to 6 characters, no whitespace, and at least 90 %
/// of its occurrences written in upper case.
pub fn is_acronym(term: &TermRecord) -> bool {
    let len = term.key.chars().count();
    if !(2..=6).contains(&len) || term.key.chars().any(char::is_whitespace) || term.occurrences.is_empty() {
        return false;
    }
    let upper = term
        .occurrences
        .iter()
        .filter(|o| {
            o.surface.chars().any(char::is_alphabetic) && !o.surface.chars().any(char::is_lowercase)
        })
        .count();
    upper * 10 >= term.occurrences.len() * 9
}

/// Computes the metric vector of one indexed term.
pub fn compute_metrics(term: &TermRecord, corpus: &Corpus, index: &TermIndex) -> Result<MetricVector, MetricsError> {
    if !index.contains(&term.key) {
        return Err(MetricsError::TermNotInIndex(term.key.clone()));
    }
    Ok(MetricContext::new(corpus, index).vector(term))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedTerm {
    pub key: String,
    pub score: f64,
    pub count: usize,
}

/// Metric vectors of every term in an index, plus a per-combination cache
/// of full rankings.
pub struct MetricTable {
    vectors: BTreeMap<String, MetricVector>,
    counts: HashMap<String, usize>,
    cache: Mutex<HashMap<String, Arc<Vec<RankedTerm>>>>,
}

impl MetricTable {
    pub fn build(corpus: &Corpus, index: &TermIndex) -> Self {
        let ctx = MetricContext::new(corpus, index);
        let records: Vec<&TermRecord> = index.records().collect();
        let vectors: Vec<(String, MetricVector)> = records
            .par_iter()
            .map(|r| (r.key.clone(), ctx.vector(r)))
            .collect();
        MetricTable {
            vectors: vectors.into_iter().collect(),
            counts: records.iter().map(|r| (r.key.clone(), r.count())).collect(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn get(&self, key: &str) -> Option<&MetricVector> {
        self.vectors.get(key)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Stores each vector on its index record.
    pub fn attach(&self, index: &mut TermIndex) {
        for record in index.records_mut() {
            record.metrics = self.vectors.get(&record.key).copied();
        }
    }

    /// Every term ranked under `c`: score descending, then occurrence count
    /// descending, then key ascending. Cached per combination.
    pub fn ranking(&self, c: &MetricCombination) -> Result<Arc<Vec<RankedTerm>>, MetricsError> {
        c.validate()?;
        let key = c.cache_key();
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let mut ranked: Vec<RankedTerm> = self
            .vectors
            .par_iter()
            .map(|(k, v)| RankedTerm {
                key: k.clone(),
                score: harmonic_unchecked(v, c),
                count: self.counts[k],
            })
            .collect();
        ranked.sort_by(compare_ranked);
        let ranked = Arc::new(ranked);
        self.cache.lock().expect("cache lock").insert(key, Arc::clone(&ranked));
        Ok(ranked)
    }

    pub fn rank(&self, c: &MetricCombination, keep: impl Fn(&str) -> bool) -> Result<Vec<RankedTerm>, MetricsError> {
        Ok(self.ranking(c)?.iter().filter(|r| keep(&r.key)).cloned().collect())
    }
}

pub fn compare_ranked(a: &RankedTerm, b: &RankedTerm) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| b.count.cmp(&a.count))
        .then_with(|| a.key.cmp(&b.key))
}

/// Ranks all index terms accepted by `keep` under combination `c`.
pub fn rank_terms(
    index: &TermIndex,
    corpus: &Corpus,
    c: &MetricCombination,
    keep: impl Fn(&str) -> bool,
) -> Result<Vec<RankedTerm>, MetricsError> {
    c.validate()?;
    MetricTable::build(corpus, index).rank(c, keep)
}
