//! Strict entity-level evaluation: an entity counts only when its whole span
//! and its label match.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AnnotatedDocument, EntityLabel, LengthMismatch};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("predicted document {pred:?} paired with gold document {gold:?}")]
    DocMismatch { pred: String, gold: String },
    #[error("document {doc_id:?}: token sequences differ at index {index}")]
    TokenMismatch { doc_id: String, index: usize },
    #[error(transparent)]
    Length(#[from] LengthMismatch),
}

/// Maximal runs of one non-OTHER label, as `(first token, end token, label)`.
pub fn entity_spans(labels: &[EntityLabel]) -> Vec<(usize, usize, EntityLabel)> {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < labels.len() {
        let label = labels[i];
        let start = i;
        while i < labels.len() && labels[i] == label {
            i += 1;
        }
        if label != EntityLabel::Other {
            spans.push((start, i, label));
        }
    }
    spans
}

/// Counts and percentage scores. Precision and recall are `None` when their
/// denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Scores {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: f64,
}

impl Scores {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let pct = |num: usize, den: usize| (den > 0).then(|| 100.0 * num as f64 / den as f64);
        let precision = pct(tp, tp + fp);
        let recall = pct(tp, tp + fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => 2.0 * p * r / (p + r),
            _ => 0.0,
        };
        Scores { tp, fp, fn_, precision, recall, f1 }
    }

    fn add(self, other: Scores) -> Scores {
        Scores::from_counts(self.tp + other.tp, self.fp + other.fp, self.fn_ + other.fn_)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub per_label: BTreeMap<EntityLabel, Scores>,
    pub overall: Scores,
}

impl EvaluationReport {
    /// Sums counts label by label and recomputes scores.
    pub fn merge(mut self, other: &EvaluationReport) -> EvaluationReport {
        for (label, s) in &other.per_label {
            let entry = self.per_label.entry(*label).or_default();
            *entry = entry.add(*s);
        }
        self.overall = self.overall.add(other.overall);
        self
    }
}

pub fn evaluate_ner(pred: &AnnotatedDocument, gold: &AnnotatedDocument) -> Result<EvaluationReport, EvalError> {
    pred.check()?;
    gold.check()?;
    if pred.doc_id != gold.doc_id {
        return Err(EvalError::DocMismatch { pred: pred.doc_id.clone(), gold: gold.doc_id.clone() });
    }
    if let Some(index) =
        (0..pred.tokens.len().max(gold.tokens.len())).find(|&i| match (pred.tokens.get(i), gold.tokens.get(i)) {
            (Some(p), Some(g)) => p.start != g.start || p.end != g.end,
            _ => true,
        })
    {
        return Err(EvalError::TokenMismatch { doc_id: pred.doc_id.clone(), index });
    }

    let pred_spans = entity_spans(&pred.labels);
    let gold_spans = entity_spans(&gold.labels);
    let gold_set: HashSet<_> = gold_spans.iter().copied().collect();
    let pred_set: HashSet<_> = pred_spans.iter().copied().collect();

    let mut counts: BTreeMap<EntityLabel, (usize, usize, usize)> = BTreeMap::new();
    for span in &pred_spans {
        let c = counts.entry(span.2).or_default();
        if gold_set.contains(span) {
            c.0 += 1;
        } else {
            c.1 += 1;
        }
    }
    for span in &gold_spans {
        if !pred_set.contains(span) {
            counts.entry(span.2).or_default().2 += 1;
        }
    }
    let per_label: BTreeMap<_, _> =
        counts.into_iter().map(|(l, (tp, fp, fn_))| (l, Scores::from_counts(tp, fp, fn_))).collect();
    let (tp, fp, fn_) = per_label.values().fold((0, 0, 0), |(a, b, c), s| (a + s.tp, b + s.fp, c + s.fn_));
    Ok(EvaluationReport { per_label, overall: Scores::from_counts(tp, fp, fn_) })
}

/// Evaluates (prediction, gold) pairs and micro-averages over all of them.
pub fn evaluate_corpus<'a, I>(pairs: I) -> Result<EvaluationReport, EvalError>
where
    I: IntoIterator<Item = (&'a AnnotatedDocument, &'a AnnotatedDocument)>,
{
    let mut total = EvaluationReport::default();
    for (pred, gold) in pairs {
        total = total.merge(&evaluate_ner(pred, gold)?);
    }
    Ok(total)
}
