//! Concept mining over personal mail, calendar and bookmark data.
//!
//! Sources are crawled into a [`model::Corpus`], tokenized into a
//! [`textprep::TermIndex`] and scored by a weighted harmonic mean of eight
//! metrics ([`metrics`]). Header and gazetteer extractors ([`extract`]) and
//! cross-silo links ([`links`]) seed a [`triage::TriageSession`], which the
//! HTTP service in [`service`] exposes for classification. Accepted concepts
//! leave through [`export`] as Turtle or JSON.
//!
//! ```no_run
//! use pim_concept_miner::ingest::{crawl, SourceSpec};
//! use pim_concept_miner::metrics::{preset, MetricTable};
//! use pim_concept_miner::model::SourceFormat;
//! use pim_concept_miner::textprep::{build_term_index, IndexOptions};
//!
//! let corpus = crawl(&[SourceSpec::new("mail.mbox", SourceFormat::Mbox)]).unwrap();
//! let index = build_term_index(&corpus, IndexOptions::default());
//! let table = MetricTable::build(&corpus, &index);
//! for r in table.ranking(&preset("balanced").unwrap()).unwrap().iter().take(10) {
//!     println!("{:.3} {}", r.score, r.key);
//! }
//! ```

pub mod export;
pub mod extract;
pub mod ingest;
pub mod links;
pub mod metrics;
pub mod model;
mod persist;
pub mod service;
pub mod textprep;
pub mod triage;
