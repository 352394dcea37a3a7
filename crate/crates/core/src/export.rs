//! Knowledge-graph export of promising concepts, items and cross links.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::extract::{ConceptCandidate, ConceptType};
use crate::links::CrossLink;
use crate::model::{Corpus, FieldKind, ItemId, Silo};
use crate::textprep::TermIndex;
use crate::triage::{Status, TriageSession};

pub const NAMESPACE: &str = "urn:pim-concepts:";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Turtle,
    Json,
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("unsupported export format {0:?}; use ttl or json")]
    UnsupportedFormat(String),
}

impl ExportFormat {
    pub fn from_name(name: &str) -> Result<Self, ExportError> {
        match name.trim().to_ascii_lowercase().as_str() {
            "ttl" | "turtle" => Ok(ExportFormat::Turtle),
            "json" => Ok(ExportFormat::Json),
            _ => Err(ExportError::UnsupportedFormat(name.to_string())),
        }
    }

    pub fn media_type(self) -> &'static str {
        match self {
            ExportFormat::Turtle => "text/turtle; charset=utf-8",
            ExportFormat::Json => "application/json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OccursIn {
    pub item: ItemId,
    pub field: FieldKind,
    pub char_start: usize,
    pub char_end: usize,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConceptNode {
    pub key: String,
    pub label: String,
    #[serde(rename = "type")]
    pub concept_type: ConceptType,
    pub occurs_in: Vec<OccursIn>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CandidateNode {
    pub label: String,
    #[serde(rename = "type")]
    pub concept_type: ConceptType,
    pub extracted_from: Vec<OccursIn>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemNode {
    pub id: ItemId,
    pub silo: Silo,
    pub summary: String,
}

/// The exported graph before serialization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    pub concepts: Vec<ConceptNode>,
    pub candidates: Vec<CandidateNode>,
    pub items: Vec<ItemNode>,
    pub links: Vec<CrossLink>,
}

fn occurs(o: &crate::model::TermOccurrence) -> OccursIn {
    OccursIn {
        item: o.item_id.clone(),
        field: o.field_kind,
        char_start: o.char_start,
        char_end: o.char_end,
        surface: o.surface.clone(),
    }
}

/// Whether a seeded candidate counts as an accepted concept: the user
/// promoted its label, or it is an untouched person or place.
fn candidate_accepted(session: &TriageSession, c: &ConceptCandidate) -> bool {
    match session.status(&c.label) {
        Status::Promising => true,
        Status::Discarded => false,
        Status::Unclassified => matches!(c.concept_type, ConceptType::Person | ConceptType::Place),
    }
}

pub fn build_graph(session: &TriageSession, corpus: &Corpus, index: &TermIndex) -> Graph {
    let concepts = session
        .promising_terms(index)
        .filter_map(|key| {
            let rec = index.get(key)?;
            Some(ConceptNode {
                key: key.to_string(),
                label: rec.display_surface().to_string(),
                concept_type: session.concept_type(key).unwrap_or(ConceptType::Topic),
                occurs_in: rec.occurrences.iter().map(occurs).collect(),
            })
        })
        .collect();
    let mut candidates: Vec<CandidateNode> = session
        .candidates
        .iter()
        .filter(|c| candidate_accepted(session, c))
        .map(|c| CandidateNode {
            label: c.label.clone(),
            concept_type: session.concept_type(&c.label).unwrap_or(c.concept_type),
            extracted_from: c.occurrences.iter().map(occurs).collect(),
        })
        .collect();
    candidates.sort_by(|a, b| (a.concept_type, &a.label).cmp(&(b.concept_type, &b.label)));
    let mut items: Vec<ItemNode> = corpus
        .items()
        .iter()
        .map(|i| ItemNode { id: i.id.clone(), silo: i.silo, summary: i.summary() })
        .collect();
    items.sort_by(|a, b| a.id.cmp(&b.id));
    let mut links = session.links.clone();
    links.sort_by(|a, b| (a.kind, &a.from_item, &a.to_item).cmp(&(b.kind, &b.from_item, &b.to_item)));
    Graph { concepts, candidates, items, links }
}

pub fn export_graph(session: &TriageSession, corpus: &Corpus, index: &TermIndex, format: ExportFormat) -> Vec<u8> {
    let graph = build_graph(session, corpus, index);
    match format {
        ExportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&graph).expect("graph serializes");
            s.push('\n');
            s.into_bytes()
        }
        ExportFormat::Turtle => to_turtle(&graph).into_bytes(),
    }
}

fn encode(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~') {
            out.push(b as char);
        } else {
            let _ = write!(out, "%{b:02X}");
        }
    }
    out
}

fn iri(kind: &str, local: &str) -> String {
    format!("<{NAMESPACE}{kind}:{}>", encode(local))
}

fn literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn type_name(t: ConceptType) -> &'static str {
    match t {
        ConceptType::Person => "Person",
        ConceptType::Place => "Place",
        ConceptType::Organization => "Organization",
        ConceptType::Topic => "Topic",
        ConceptType::Project => "Project",
        ConceptType::Time => "Time",
    }
}

fn write_provenance(out: &mut String, node: &str, predicate: &str, owner: &str, o: &OccursIn) {
    let _ = writeln!(
        out,
        "{node} a pc:Occurrence ;\n    pc:{predicate} {owner} ;\n    pc:item {} ;\n    pc:field {} ;\n    pc:charStart {} ;\n    pc:charEnd {} ;\n    pc:surface {} .\n",
        iri("item", o.item.as_str()),
        literal(o.field.as_str()),
        o.char_start,
        o.char_end,
        literal(&o.surface),
    );
}

pub fn to_turtle(graph: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@prefix pc: <{NAMESPACE}vocab#> .\n");

    for c in &graph.concepts {
        let node = iri("concept", &c.key);
        let mut items: Vec<&ItemId> = c.occurs_in.iter().map(|o| &o.item).collect();
        items.sort();
        items.dedup();
        let _ = write!(
            out,
            "{node} a pc:Concept ;\n    pc:conceptType pc:{} ;\n    pc:key {} ;\n    pc:label {}",
            type_name(c.concept_type),
            literal(&c.key),
            literal(&c.label)
        );
        if !items.is_empty() {
            let list: Vec<String> = items.iter().map(|id| iri("item", id.as_str())).collect();
            let _ = write!(out, " ;\n    pc:occursIn {}", list.join(", "));
        }
        out.push_str(" .\n\n");
        for (n, o) in c.occurs_in.iter().enumerate() {
            let occ = iri("occurrence", &format!("{}/{n}", c.key));
            write_provenance(&mut out, &occ, "concept", &node, o);
        }
    }

    for c in &graph.candidates {
        let local = format!("{}/{}", c.concept_type.as_str(), c.label);
        let node = iri("candidate", &local);
        let _ = write!(
            out,
            "{node} a pc:Concept ;\n    pc:conceptType pc:{} ;\n    pc:label {}",
            type_name(c.concept_type),
            literal(&c.label)
        );
        let mut items: Vec<&ItemId> = c.extracted_from.iter().map(|o| &o.item).collect();
        items.sort();
        items.dedup();
        if !items.is_empty() {
            let list: Vec<String> = items.iter().map(|id| iri("item", id.as_str())).collect();
            let _ = write!(out, " ;\n    pc:extractedFrom {}", list.join(", "));
        }
        out.push_str(" .\n\n");
        for (n, o) in c.extracted_from.iter().enumerate() {
            let occ = iri("occurrence", &format!("{local}/{n}"));
            write_provenance(&mut out, &occ, "candidate", &node, o);
        }
    }

    for item in &graph.items {
        let _ = writeln!(
            out,
            "{} a pc:Item ;\n    pc:silo pc:{} ;\n    pc:summary {} .\n",
            iri("item", item.id.as_str()),
            item.silo.as_str(),
            literal(&item.summary)
        );
    }

    let mut counters: BTreeMap<&str, usize> = BTreeMap::new();
    for link in &graph.links {
        let kind = link.kind.as_str();
        let n = counters.entry(kind).or_default();
        let from = iri("item", link.from_item.as_str());
        let to = iri("item", link.to_item.as_str());
        let _ = writeln!(out, "{from} pc:{kind} {to} .");
        let _ = writeln!(
            out,
            "{} a pc:CrossLink ;\n    pc:kind {} ;\n    pc:from {from} ;\n    pc:to {to} ;\n    pc:detail {} .\n",
            iri("link", &format!("{kind}/{n}")),
            literal(kind),
            literal(&link.detail)
        );
        *n += 1;
    }
    out
}
