//! Extraction of material property records from polymer abstracts.
//!
//! The crate is organised along the processing pipeline:
//!
//! * [`corpus`]: markup stripping, Unicode normalisation, sentence splitting and
//!   relevance filters over raw abstracts.
//! * [`tokenize`]: wordpiece tokenization with character offsets.
//! * [`annotate`]: entity ontology, annotated-corpus IO, dataset splits,
//!   inter-annotator agreement and strict entity-level evaluation.
//! * [`tag`]: the tagger seam (dictionary tagger or external predictions) and
//!   mention assembly.
//! * [`extract`]: entity filtering, coreference, name normalisation, value
//!   parsing, unit conversion and the relation heuristics that produce records.
//! * [`store`]: the append-only record store, composition classes, analytics and
//!   paginated queries.
//!
//! Per-document work is independent; [`par`] maps it over a corpus either
//! serially or with rayon when the `parallel` feature is enabled.

pub mod annotate;
pub mod corpus;
pub mod extract;
pub mod jsonl;
pub mod par;
pub mod record;
pub mod store;
pub mod synth;
pub mod tag;
pub mod text;
pub mod tokenize;

pub use annotate::EntityLabel;
pub use corpus::{Document, RawDocument};
pub use record::{CompositionClass, MaterialPropertyRecord, ParsedValue, RelationMode};
pub use tokenize::{TokenSpan, Vocabulary};
