#![allow(dead_code)]

pub mod oracles;

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pim_concept_miner::ingest::{crawl, parse_bookmarks_html, parse_ics, parse_mbox, parse_message, SourceSpec};
use pim_concept_miner::model::{Corpus, FieldKind, ItemId, PimItem, Silo, SourceFormat};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn scenario_specs() -> Vec<SourceSpec> {
    let root = fixtures().join("scenario");
    vec![
        SourceSpec::new(root.join("mail"), SourceFormat::EmlDirectory),
        SourceSpec::new(root.join("Archive.mbox"), SourceFormat::Mbox),
        SourceSpec::new(root.join("calendar.ics"), SourceFormat::Ics),
        SourceSpec::new(root.join("bookmarks.html"), SourceFormat::BookmarksHtml),
    ]
}

pub fn scenario_corpus() -> Corpus {
    crawl(&scenario_specs()).expect("scenario fixtures parse")
}

pub fn parser_fixture(name: &str) -> Vec<u8> {
    std::fs::read(fixtures().join("parsers").join(name)).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Words chosen to collide: case variants, substrings of each other,
/// multi-word labels, digits, symbols and non-ASCII letters.
pub const VOCAB: &[&str] = &[
    "MLKG", "mlkg", "Mlkg", "graph", "Graph", "GRAPH", "York", "york", "Yorkshire", "New", "new", "KG", "kg",
    "alpha", "beta", "gamma", "delta", "Koehler", "anna", "Anna", "brown", "Brown", "München", "münchen",
    "Straße", "café", "2019", "11th", "x1", "a", "I", "--", "!!", "3.14", "e-mail", "don't", "B2B", "über",
    "Projects", "projects", "Archive", "ontology", "review", "agenda", "the", "and", "of",
];

pub const SEPARATORS: &[&str] = &[" ", " ", " ", ", ", ". ", "\n", " - ", "/", "(", ")", "  "];

pub fn random_text(rng: &mut impl Rng, words: usize) -> String {
    let mut s = String::new();
    for i in 0..words {
        if i > 0 {
            s.push_str(SEPARATORS.choose(rng).unwrap());
        }
        s.push_str(VOCAB.choose(rng).unwrap());
    }
    s
}

const FOLDERS: &[&str] = &["Projects", "MLKG", "Archive", "Misc", "New York", "Reading", "graph"];

fn random_folder(rng: &mut impl Rng) -> Vec<String> {
    let depth = rng.gen_range(0..=3);
    (0..depth).map(|_| FOLDERS.choose(rng).unwrap().to_string()).collect()
}

/// Items with random free-text fields in all three silos.
pub fn random_corpus(rng: &mut impl Rng, items: usize) -> Corpus {
    let mut out = Vec::with_capacity(items);
    for i in 0..items {
        let silo = *Silo::ALL.choose(rng).unwrap();
        let mut item = PimItem::new(ItemId::derive(silo, format!("random-{i}").as_bytes()), silo);
        let fields: Vec<FieldKind> = FieldKind::TEXT.into_iter().filter(|f| f.silo() == silo).collect();
        for field in fields {
            if rng.gen_bool(0.75) {
                let n = rng.gen_range(1..12);
                item.set_field(field, random_text(rng, n));
            }
        }
        let folder = random_folder(rng);
        match silo {
            Silo::Mail if !folder.is_empty() => item.set_field(FieldKind::MailFolder, folder.join("/")),
            Silo::Bookmark if !folder.is_empty() => {
                item.fields.insert(FieldKind::BookmarkFolder, folder.clone());
            }
            _ => {}
        }
        item.folder_path = folder;
        out.push(item);
    }
    Corpus::from_items(out, vec![])
}

/// Items whose texts share long passages so copied-text detection has
/// something to find.
pub fn copy_corpus(rng: &mut impl Rng, items: usize) -> Corpus {
    let passages: Vec<String> = (0..3)
        .map(|_| {
            let n = rng.gen_range(8..20);
            random_text(rng, n)
        })
        .collect();
    let mut out = Vec::new();
    for i in 0..items {
        let silo = *Silo::ALL.choose(rng).unwrap();
        let mut item = PimItem::new(ItemId::derive(silo, format!("copy-{i}").as_bytes()), silo);
        let fields: Vec<FieldKind> = FieldKind::TEXT.into_iter().filter(|f| f.silo() == silo).collect();
        for field in fields {
            if !rng.gen_bool(0.6) {
                continue;
            }
            let n = rng.gen_range(0..6);
            let mut text = random_text(rng, n);
            if rng.gen_bool(0.5) {
                let p = passages.choose(rng).unwrap();
                // Take a random slice of the passage so runs vary in length.
                let words: Vec<&str> = p.split(' ').collect();
                let from = rng.gen_range(0..words.len());
                let to = rng.gen_range(from..=words.len());
                text.push(' ');
                text.push_str(&words[from..to].join(" "));
            }
            text.push(' ');
            let n = rng.gen_range(0..6);
            text.push_str(&random_text(rng, n));
            item.set_field(field, text);
        }
        out.push(item);
    }
    Corpus::from_items(out, vec![])
}

fn mutate(rng: &mut impl Rng, seed: &[u8]) -> Vec<u8> {
    let mut data = seed.to_vec();
    for _ in 0..rng.gen_range(1..16) {
        let pos = if data.is_empty() { 0 } else { rng.gen_range(0..data.len()) };
        match rng.gen_range(0..5) {
            0 if !data.is_empty() => data[pos] = rng.gen(),
            1 => data.insert(pos, *b"\r\n<>:;=\\\" >From".choose(rng).unwrap()),
            2 if !data.is_empty() => {
                let end = (pos + rng.gen_range(1..40)).min(data.len());
                data.drain(pos..end);
            }
            3 if !data.is_empty() => {
                let end = (pos + rng.gen_range(1..40)).min(data.len());
                let chunk = data[pos..end].to_vec();
                let at = rng.gen_range(0..=data.len());
                data.splice(at..at, chunk);
            }
            _ => data.truncate(pos),
        }
    }
    data
}

pub const FUZZ_ITERATIONS: usize = 400;

/// Feeds mutated fixtures to every parser; any panic fails the test.
pub fn fuzz_all_parsers(seed: u64, iterations: usize) {
    let mut rng = rng(seed);
    let seeds = [
        parser_fixture("encoded.eml"),
        parser_fixture("html.eml"),
        parser_fixture("archive.mbox"),
        parser_fixture("folded.ics"),
        parser_fixture("nested.html"),
    ];
    for _ in 0..iterations {
        for s in &seeds {
            let data = mutate(&mut rng, s);
            let _ = parse_message(&data, &[]);
            let _ = parse_mbox(&data, None);
            let _ = parse_ics(&data);
            let _ = parse_bookmarks_html(&data);
        }
        let noise: Vec<u8> = (0..rng.gen_range(0..256)).map(|_| rng.gen()).collect();
        let _ = parse_message(&noise, &[]);
        let _ = parse_mbox(&noise, None);
        let _ = parse_ics(&noise);
        let _ = parse_bookmarks_html(&noise);
    }
}

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ne", "su", "ta", "vo", "ri", "be", "du", "fa", "go", "hu", "ji", "ke", "pa", "qu", "ro", "si", "ze",
];

/// Distinct pronounceable word number `n`: at least three syllables, so
/// distinct `n` never collide.
pub fn synthetic_word(mut n: usize) -> String {
    let mut w = String::new();
    for _ in 0..3 {
        w.push_str(SYLLABLES[n % SYLLABLES.len()]);
        n /= SYLLABLES.len();
    }
    while n > 0 {
        w.push_str(SYLLABLES[n % SYLLABLES.len()]);
        n /= SYLLABLES.len();
    }
    w
}

/// Writes an mbox, an ICS file and a bookmark file that together hold
/// `items` items and at least `terms` distinct terms.
pub fn write_large_sources(dir: &std::path::Path, rng: &mut impl Rng, items: usize, terms: usize) -> Vec<SourceSpec> {
    let per_item = terms.div_ceil(items);
    let mut next = 0usize;
    let mut text = |rng: &mut ChaCha8Rng, words: usize| {
        let mut parts: Vec<String> = Vec::new();
        for _ in 0..per_item {
            parts.push(synthetic_word(next));
            next += 1;
        }
        for _ in 0..words {
            // Skewed towards a small head so term frequencies vary.
            let r: f64 = rng.gen();
            parts.push(synthetic_word((r * r * r * terms as f64) as usize));
        }
        parts.join(" ")
    };
    let mut local = ChaCha8Rng::from_rng(rng).unwrap();
    let mails = items * 2 / 5;
    let events = items * 3 / 10;
    let bookmarks = items - mails - events;

    let mut mbox = String::new();
    for i in 0..mails {
        let subject = text(&mut local, 4);
        let body = text(&mut local, 40);
        mbox.push_str(&format!(
            "From sender{i}@example.org Mon Jan  7 10:00:00 2019\nFrom: Sender {i} <sender{i}@host{}.example.com>\nTo: me@example.org\nSubject: {subject}\nDate: Mon, 7 Jan 2019 10:{:02}:00 +0000\nMessage-ID: <large-{i}@example.org>\n\n{body}\n\n",
            i % 50,
            i % 60
        ));
    }
    let mut ics = String::from("BEGIN:VCALENDAR\r\nVERSION:2.0\r\n");
    for i in 0..events {
        ics.push_str(&format!(
            "BEGIN:VEVENT\r\nUID:large-{i}\r\nDTSTART:2019{:02}{:02}T090000Z\r\nSUMMARY:{}\r\nDESCRIPTION:{}\r\nLOCATION:Berlin\r\nEND:VEVENT\r\n",
            1 + i % 12,
            1 + i % 28,
            text(&mut local, 3),
            text(&mut local, 20)
        ));
    }
    ics.push_str("END:VCALENDAR\r\n");
    let mut html = String::from("<!DOCTYPE NETSCAPE-Bookmark-file-1>\n<DL><p>\n");
    for f in 0..10 {
        html.push_str(&format!("<DT><H3>Folder {}</H3>\n<DL><p>\n", synthetic_word(f)));
        for i in (f..bookmarks).step_by(10) {
            html.push_str(&format!(
                "<DT><A HREF=\"https://site{i}.example.net/page\">{}</A>\n<DD>{}\n",
                text(&mut local, 4),
                text(&mut local, 12)
            ));
        }
        html.push_str("</DL><p>\n");
    }
    html.push_str("</DL><p>\n");

    let write = |name: &str, body: &str| {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    vec![
        SourceSpec::new(write("large.mbox", &mbox), SourceFormat::Mbox),
        SourceSpec::new(write("large.ics", &ics), SourceFormat::Ics),
        SourceSpec::new(write("large.html", &html), SourceFormat::BookmarksHtml),
    ]
}
