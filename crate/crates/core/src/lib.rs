//! Dense paraphrasing of annotated procedural text.
//!
//! The crate reads a CoNLL-U dialect carrying entity, event, role, hidden
//! entity and coreference layers, builds an event graph with per-entity state
//! timelines, and emits human readable (HRP) and machine readable (MRP)
//! paraphrases, generated questions, corpus statistics and scores.

pub mod config;
pub mod conllu;
pub mod coref;
pub mod error;
pub mod events;
pub mod fixtures;
pub mod metrics;
pub mod mrp;
pub mod paraphrase;
pub mod pipeline;
pub mod qgen;
pub mod stats;
pub mod subevent;
pub mod types;

pub use conllu::{
    parse_corpus, parse_corpus_bytes, write_corpus, write_document, Corpus, Document,
};
pub use error::{Error, Result};
pub use pipeline::{analyze, Analysis, Resources};
