mod common;

use chrono::NaiveDate;
use proptest::prelude::*;
use rand::SeedableRng;

use pim_concept_miner::extract::Matcher;
use pim_concept_miner::links::{detect_date_mentions, find_urls, normalize_url, resolve_yearless};
use pim_concept_miner::metrics::{harmonic_score, Metric, MetricCombination, MetricVector};
use pim_concept_miner::model::{char_slice, Corpus};
use pim_concept_miner::textprep::{build_term_index, field_terms, tokenize, IndexOptions};
use pim_concept_miner::triage::{Status, TriageSession};

fn text_strategy() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-zA-Z0-9 .,;:'/\\-]{0,60}",
        "\\PC{0,40}",
        proptest::collection::vec(proptest::sample::select(common::VOCAB), 0..12).prop_map(|w| w.join(" ")),
    ]
}

fn corpus_strategy() -> impl Strategy<Value = Corpus> {
    (any::<u64>(), 0usize..25).prop_map(|(seed, n)| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        common::random_corpus(&mut rng, n)
    })
}

fn weights_strategy() -> impl Strategy<Value = MetricCombination> {
    proptest::collection::vec(prop_oneof![Just(0.0), 0.05f64..10.0], 8)
        .prop_filter("one positive weight", |w| w.iter().any(|x| *x > 0.0))
        .prop_map(|w| MetricCombination::new("p", Metric::ALL.into_iter().zip(w)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tokens_are_ordered_slices_of_the_text(text in text_strategy()) {
        let tokens = tokenize(&text);
        let mut last = 0;
        for t in &tokens {
            prop_assert!(t.char_start >= last && t.char_end > t.char_start);
            prop_assert_eq!(char_slice(&text, t.char_start, t.char_end), Some(t.surface));
            prop_assert!(!t.surface.chars().any(char::is_whitespace));
            last = t.char_end;
        }
        // Everything between tokens is whitespace.
        let covered: usize = tokens.iter().map(|t| t.char_end - t.char_start).sum();
        let non_ws = text.chars().filter(|c| !c.is_whitespace()).count();
        prop_assert_eq!(covered, non_ws);
    }

    #[test]
    fn field_terms_keys_are_lowercase_surfaces(text in text_strategy(), ngrams in any::<bool>()) {
        for (key, tok) in field_terms(&text, ngrams) {
            prop_assert_eq!(&key, &tok.surface.to_lowercase());
            prop_assert!(key.chars().any(char::is_alphabetic));
        }
    }

    #[test]
    fn index_occurrences_point_at_their_surface(corpus in corpus_strategy(), ngrams in any::<bool>()) {
        let index = build_term_index(&corpus, IndexOptions { ngrams });
        for rec in index.records() {
            prop_assert!(!rec.occurrences.is_empty());
            prop_assert_eq!(rec.surfaces.values().sum::<usize>(), rec.count());
            for o in &rec.occurrences {
                let item = corpus.item(&o.item_id).unwrap();
                let text = item.text(o.field_kind).unwrap();
                prop_assert_eq!(char_slice(&text, o.char_start, o.char_end), Some(o.surface.as_str()));
                prop_assert_eq!(o.surface.to_lowercase(), rec.key.clone());
            }
        }
    }

    #[test]
    fn matcher_agrees_with_naive_scan(text in text_strategy(), labels in proptest::collection::vec(text_strategy(), 1..4)) {
        let m = Matcher::new(&labels);
        let mut got: Vec<(usize, usize, usize)> = m.find_all(&text).into_iter().map(|h| (h.char_start, h.char_end, h.pattern)).collect();
        got.sort();
        let mut want = Vec::new();
        for (n, l) in labels.iter().enumerate() {
            for (s, e) in common::oracles::naive_find(&text, l) {
                want.push((s, e, n));
            }
        }
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn harmonic_score_within_bounds(values in proptest::array::uniform8(0.0f64..=1.0), c in weights_strategy()) {
        let v = MetricVector::from_values(values);
        let s = harmonic_score(&v, &c).unwrap();
        let used: Vec<f64> = c.weights.iter().filter(|(_, w)| **w > 0.0).map(|(m, _)| v.get(*m).clamp(1e-9, 1.0)).collect();
        let lo = used.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = used.iter().cloned().fold(0.0, f64::max);
        prop_assert!(lo - 1e-12 <= s && s <= hi + 1e-12);
    }

    #[test]
    fn harmonic_score_ignores_weight_scale(values in proptest::array::uniform8(0.0f64..=1.0), c in weights_strategy(), k in 0.001f64..1000.0) {
        let v = MetricVector::from_values(values);
        let scaled = MetricCombination::new("k", c.weights.iter().map(|(m, w)| (*m, w * k)));
        let a = harmonic_score(&v, &c).unwrap();
        let b = harmonic_score(&v, &scaled).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn corpus_json_round_trips(corpus in corpus_strategy()) {
        let json = corpus.to_json();
        let back = Corpus::from_json(&json).unwrap();
        prop_assert_eq!(back.to_json(), json);
        prop_assert_eq!(back.content_hash(), corpus.content_hash());
    }

    #[test]
    fn session_json_round_trips(corpus in corpus_strategy(), picks in proptest::collection::vec((any::<prop::sample::Index>(), any::<bool>()), 0..20)) {
        let index = build_term_index(&corpus, IndexOptions::default());
        let mut s = TriageSession::new(&corpus, &index, vec![]).unwrap();
        let keys: Vec<String> = index.keys().map(str::to_string).collect();
        if !keys.is_empty() {
            for (i, promising) in picks {
                let status = if promising { Status::Promising } else { Status::Discarded };
                s.classify(&index, i.get(&keys), status, None).unwrap();
            }
        }
        let json = s.to_json();
        let back = TriageSession::from_json(&json).unwrap();
        prop_assert_eq!(back.to_json(), json);
        let p = back.progress(&index);
        prop_assert_eq!(p.unclassified + p.promising + p.discarded, index.len());
    }

    #[test]
    fn yearless_dates_land_within_half_a_year(month in 1u32..=12, day in 1u32..=31, days in 0i64..40000) {
        let reference = NaiveDate::from_ymd_opt(1950, 1, 1).unwrap() + chrono::Duration::days(days);
        if let Some(d) = resolve_yearless(month, day, reference) {
            prop_assert!((d - reference).num_days().abs() <= 366);
            prop_assert_eq!((d.format("%m").to_string(), d.format("%d").to_string()), (format!("{month:02}"), format!("{day:02}")));
        }
    }

    #[test]
    fn date_mentions_do_not_overlap(text in text_strategy(), day in 1u32..=28) {
        let text = format!("{text} {day} February and Feb {day}, 2019 {text}");
        let found = detect_date_mentions(&text, NaiveDate::from_ymd_opt(2019, 2, 5).unwrap());
        prop_assert!(!found.is_empty());
        for w in found.windows(2) {
            prop_assert!(w[0].char_end <= w[1].char_start);
        }
    }

    #[test]
    fn url_normalization_is_idempotent(host in "[a-z]{1,10}\\.(com|org|de)", path in "(/[a-zA-Z0-9_]{0,6}){0,3}", frag in "(#[a-z]{0,4})?") {
        let raw = format!("HTTPS://{}{path}{frag}", host.to_uppercase());
        let n = normalize_url(&raw).unwrap();
        prop_assert_eq!(normalize_url(&n).unwrap(), n.clone());
        prop_assert!(!n.contains('#') && !n.ends_with('/'));
        let found = find_urls(&format!("see {raw}. thanks"));
        prop_assert_eq!(found.len(), 1);
        prop_assert_eq!(&found[0].0, &n);
    }
}
