//! The tagger seam: anything that assigns one [`EntityLabel`] per token.
//!
//! Two taggers ship with the crate. [`GazetteerTagger`] labels dictionary
//! matches and number+unit runs, so the pipeline runs without a neural model.
//! [`PredictionsTagger`] replays labels produced elsewhere, read from the
//! annotated-corpus JSON-lines format.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{dictionary_preannotate, AnnotatedDocument, EntityLabel, Gazetteer};
use crate::corpus::Document;
use crate::extract::quantity::numeric_part;
use crate::extract::units::UnitRegistry;
use crate::jsonl::{self, JsonlError};
use crate::text::CharIndex;
use crate::tokenize::{split_words, word_indices, TokenSpan};

/// Assigns labels to the tokens of a document. Implementations are shared
/// across worker threads.
pub trait Tagger: Send + Sync {
    fn tag(&self, doc: &Document, tokens: &[TokenSpan]) -> Vec<EntityLabel>;
}

/// Longest number+unit run the quantity rule will consider, in words after
/// the number.
const MAX_UNIT_WORDS: usize = 4;

/// Dictionary matches plus a quantity rule: a number followed by a known
/// amount unit is MATERIAL_AMOUNT, by a known property unit PROPERTY_VALUE.
#[derive(Debug, Clone)]
pub struct GazetteerTagger {
    gazetteer: Gazetteer,
    registry: UnitRegistry,
}

impl GazetteerTagger {
    /// Property names and synonyms from the registry are added as
    /// PROPERTY_NAME entries unless the gazetteer already lists them.
    pub fn new(mut gazetteer: Gazetteer, registry: UnitRegistry) -> Self {
        for spec in registry.properties() {
            gazetteer.extend(EntityLabel::PropertyName, std::iter::once(&spec.canonical_name).chain(&spec.synonyms));
        }
        GazetteerTagger { gazetteer, registry }
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }
}

impl Tagger for GazetteerTagger {
    fn tag(&self, doc: &Document, tokens: &[TokenSpan]) -> Vec<EntityLabel> {
        let mut labels = dictionary_preannotate(&doc.text, tokens, &self.gazetteer);
        for (start, end, label) in quantity_spans(&doc.text, &self.registry) {
            for (t, l) in tokens.iter().zip(labels.iter_mut()) {
                if *l == EntityLabel::Other && start <= t.start && t.end <= end {
                    *l = label;
                }
            }
        }
        labels
    }
}

/// Character spans of number+unit runs whose unit the registry knows.
pub fn quantity_spans(text: &str, registry: &UnitRegistry) -> Vec<(usize, usize, EntityLabel)> {
    let chars: Vec<char> = text.chars().collect();
    let idx = CharIndex::new(text);
    let words = split_words(text);
    let mut spans = Vec::new();
    let mut w = 0;
    while w < words.len() {
        let start = words[w].start;
        let starts_number = chars[start].is_ascii_digit()
            || (matches!(chars[start], '-' | '+' | '.') && chars.get(start + 1).is_some_and(char::is_ascii_digit));
        let boundary = start == 0 || !chars[start - 1].is_alphanumeric();
        let part = if starts_number && boundary { numeric_part(&chars, start) } else { None };
        let Some(part) = part else {
            w += 1;
            continue;
        };
        let first_unit = words.iter().position(|x| x.start >= part.end).unwrap_or(words.len());
        let mut found = None;
        for k in (first_unit..(first_unit + MAX_UNIT_WORDS).min(words.len())).rev() {
            let unit = idx.slice(words[first_unit].start, words[k].end);
            if registry.amount_unit(unit).is_some() {
                found = Some((words[k].end, k, EntityLabel::MaterialAmount));
            } else if registry.is_property_unit(unit) {
                found = Some((words[k].end, k, EntityLabel::PropertyValue));
            }
            if found.is_some() {
                break;
            }
        }
        match found {
            Some((end, k, label)) => {
                spans.push((start, end, label));
                w = k + 1;
            }
            None => w = first_unit.max(w + 1),
        }
    }
    spans
}

#[derive(Debug, Error)]
pub enum PredictionError {
    #[error(transparent)]
    Read(#[from] JsonlError),
    #[error("predictions for unknown document {0:?}")]
    UnknownDoc(String),
    #[error("document {doc_id:?}: {tokens} tokens after tokenization but {labels} predicted labels")]
    LengthMismatch { doc_id: String, tokens: usize, labels: usize },
    #[error("document {doc_id:?}: predicted token {index} does not match the tokenization")]
    TokenMismatch { doc_id: String, index: usize },
}

/// Reads predictions in the annotated-corpus format. Label strings outside
/// the ontology fail here as parse errors.
pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<AnnotatedDocument>, PredictionError> {
    Ok(jsonl::read(path)?)
}

/// Checks predictions against the corpus tokenization and returns labels per
/// document id.
pub fn attach_predictions<'a>(
    corpus: impl IntoIterator<Item = (&'a str, &'a [TokenSpan])>,
    predictions: Vec<AnnotatedDocument>,
) -> Result<BTreeMap<String, Vec<EntityLabel>>, PredictionError> {
    let tokens: HashMap<&str, &[TokenSpan]> = corpus.into_iter().collect();
    let mut out = BTreeMap::new();
    for pred in predictions {
        let Some(toks) = tokens.get(pred.doc_id.as_str()) else {
            return Err(PredictionError::UnknownDoc(pred.doc_id));
        };
        if pred.labels.len() != toks.len() || pred.tokens.len() != toks.len() {
            return Err(PredictionError::LengthMismatch {
                doc_id: pred.doc_id,
                tokens: toks.len(),
                labels: pred.labels.len(),
            });
        }
        if let Some(index) = pred.tokens.iter().zip(toks.iter()).position(|(a, b)| (a.start, a.end) != (b.start, b.end))
        {
            return Err(PredictionError::TokenMismatch { doc_id: pred.doc_id, index });
        }
        out.insert(pred.doc_id, pred.labels);
    }
    Ok(out)
}

/// Replays attached predictions. Documents without predictions are all OTHER.
#[derive(Debug, Clone, Default)]
pub struct PredictionsTagger {
    labels: BTreeMap<String, Vec<EntityLabel>>,
}

impl PredictionsTagger {
    pub fn new(labels: BTreeMap<String, Vec<EntityLabel>>) -> Self {
        PredictionsTagger { labels }
    }
}

impl Tagger for PredictionsTagger {
    fn tag(&self, doc: &Document, tokens: &[TokenSpan]) -> Vec<EntityLabel> {
        match self.labels.get(&doc.doc_id) {
            Some(l) if l.len() == tokens.len() => l.clone(),
            _ => vec![EntityLabel::Other; tokens.len()],
        }
    }
}

/// A contiguous labeled span of one document.
///
/// `token_end` and `word_end` are exclusive. Word indices count pre-split
/// words, so continuation pieces do not add distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityMention {
    pub doc_id: String,
    pub label: EntityLabel,
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub sentence_index: usize,
    pub cluster_id: Option<usize>,
    pub normalized_name: Option<String>,
    pub token_start: usize,
    pub token_end: usize,
    pub word_start: usize,
    pub word_end: usize,
}

impl EntityMention {
    pub fn new(doc_id: &str, label: EntityLabel, surface: &str, start: usize, end: usize) -> Self {
        EntityMention {
            doc_id: doc_id.to_string(),
            label,
            surface: surface.to_string(),
            start,
            end,
            sentence_index: 0,
            cluster_id: None,
            normalized_name: None,
            token_start: 0,
            token_end: 0,
            word_start: 0,
            word_end: 0,
        }
    }

    /// Words strictly between two mentions; 0 when they touch or overlap.
    pub fn word_distance(&self, other: &EntityMention) -> usize {
        other.word_start.saturating_sub(self.word_end).max(self.word_start.saturating_sub(other.word_end))
    }
}

/// Maximal runs of one non-OTHER label, split where a run crosses a sentence
/// boundary.
pub fn assemble_mentions(doc: &Document, tokens: &[TokenSpan], labels: &[EntityLabel]) -> Vec<EntityMention> {
    let n = tokens.len().min(labels.len());
    let idx = CharIndex::new(&doc.text);
    let words = word_indices(&tokens[..n]);
    let sentence = |t: &TokenSpan| doc.sentence_of(t.start);
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let label = labels[i];
        if label == EntityLabel::Other {
            i += 1;
            continue;
        }
        let s = sentence(&tokens[i]);
        let mut j = i + 1;
        while j < n && labels[j] == label && sentence(&tokens[j]) == s {
            j += 1;
        }
        let (start, end) = (tokens[i].start, tokens[j - 1].end);
        out.push(EntityMention {
            doc_id: doc.doc_id.clone(),
            label,
            surface: idx.slice(start, end).to_string(),
            start,
            end,
            sentence_index: doc.sentence_of((start + end) / 2),
            cluster_id: None,
            normalized_name: None,
            token_start: i,
            token_end: j,
            word_start: words[i],
            word_end: words[j - 1] + 1,
        });
        i = j;
    }
    out
}

/// Paints mention labels back onto a token sequence of length `n`.
pub fn paint_mentions(n: usize, mentions: &[EntityMention]) -> Vec<EntityLabel> {
    let mut labels = vec![EntityLabel::Other; n];
    for m in mentions {
        labels[m.token_start..m.token_end.min(n)].fill(m.label);
    }
    labels
}
