//! Entity ontology and annotated-corpus handling.
//!
//! An annotated document is a token sequence with one [`EntityLabel`] per
//! token (IO scheme: no begin marker). The same JSON-lines layout carries gold
//! annotations and external tagger predictions.

mod agreement;
mod eval;
mod gazetteer;
mod split;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenize::TokenSpan;

pub use agreement::{
    agreement_report, cohen_components, cohen_kappa, fleiss_components, fleiss_kappa, AgreementError, AgreementReport,
    PairwiseKappa,
};
pub use eval::{entity_spans, evaluate_corpus, evaluate_ner, EvalError, EvaluationReport, Scores};
pub use gazetteer::{dictionary_preannotate, Gazetteer, GazetteerError};
pub use split::{split_dataset, DatasetSplit, SplitError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityLabel {
    Polymer,
    #[serde(alias = "POLYMER_FAMILY")]
    PolymerClass,
    Monomer,
    #[serde(alias = "ORGANIC")]
    OrganicMaterial,
    #[serde(alias = "INORGANIC")]
    InorganicMaterial,
    MaterialAmount,
    PropertyName,
    PropertyValue,
    #[default]
    #[serde(alias = "O")]
    Other,
}

impl EntityLabel {
    pub const ALL: [EntityLabel; 9] = [
        EntityLabel::Polymer,
        EntityLabel::PolymerClass,
        EntityLabel::Monomer,
        EntityLabel::OrganicMaterial,
        EntityLabel::InorganicMaterial,
        EntityLabel::MaterialAmount,
        EntityLabel::PropertyName,
        EntityLabel::PropertyValue,
        EntityLabel::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityLabel::Polymer => "POLYMER",
            EntityLabel::PolymerClass => "POLYMER_CLASS",
            EntityLabel::Monomer => "MONOMER",
            EntityLabel::OrganicMaterial => "ORGANIC_MATERIAL",
            EntityLabel::InorganicMaterial => "INORGANIC_MATERIAL",
            EntityLabel::MaterialAmount => "MATERIAL_AMOUNT",
            EntityLabel::PropertyName => "PROPERTY_NAME",
            EntityLabel::PropertyValue => "PROPERTY_VALUE",
            EntityLabel::Other => "OTHER",
        }
    }

    /// Labels whose mentions denote materials.
    pub fn is_material(self) -> bool {
        matches!(
            self,
            EntityLabel::Polymer
                | EntityLabel::PolymerClass
                | EntityLabel::Monomer
                | EntityLabel::OrganicMaterial
                | EntityLabel::InorganicMaterial
        )
    }

    /// The polymer-family labels that let an abstract through entity filtering.
    pub fn is_polymer_family(self) -> bool {
        matches!(self, EntityLabel::Polymer | EntityLabel::PolymerClass | EntityLabel::Monomer)
    }
}

impl fmt::Display for EntityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown entity label {0:?}")]
pub struct UnknownLabel(pub String);

impl FromStr for EntityLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "POLYMER" => EntityLabel::Polymer,
            "POLYMER_CLASS" | "POLYMER_FAMILY" => EntityLabel::PolymerClass,
            "MONOMER" => EntityLabel::Monomer,
            "ORGANIC_MATERIAL" | "ORGANIC" => EntityLabel::OrganicMaterial,
            "INORGANIC_MATERIAL" | "INORGANIC" => EntityLabel::InorganicMaterial,
            "MATERIAL_AMOUNT" => EntityLabel::MaterialAmount,
            "PROPERTY_NAME" => EntityLabel::PropertyName,
            "PROPERTY_VALUE" => EntityLabel::PropertyValue,
            "OTHER" | "O" => EntityLabel::Other,
            _ => return Err(UnknownLabel(s.to_string())),
        })
    }
}

/// Token-level annotation of one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub tokens: Vec<TokenSpan>,
    pub labels: Vec<EntityLabel>,
}

#[derive(Debug, Error, PartialEq)]
#[error("document {doc_id:?}: {tokens} tokens but {labels} labels")]
pub struct LengthMismatch {
    pub doc_id: String,
    pub tokens: usize,
    pub labels: usize,
}

impl AnnotatedDocument {
    pub fn new(
        doc_id: impl Into<String>,
        tokens: Vec<TokenSpan>,
        labels: Vec<EntityLabel>,
    ) -> Result<Self, LengthMismatch> {
        let doc = AnnotatedDocument { doc_id: doc_id.into(), tokens, labels };
        doc.check()?;
        Ok(doc)
    }

    pub fn check(&self) -> Result<(), LengthMismatch> {
        if self.tokens.len() != self.labels.len() {
            return Err(LengthMismatch {
                doc_id: self.doc_id.clone(),
                tokens: self.tokens.len(),
                labels: self.labels.len(),
            });
        }
        Ok(())
    }
}

/// A labeled character span, used to author gold annotations by hand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSpan {
    pub start: usize,
    pub end: usize,
    pub label: EntityLabel,
}

/// Labels every token whose character span lies inside a labeled span.
pub fn paint_spans(tokens: &[TokenSpan], spans: &[LabeledSpan]) -> Vec<EntityLabel> {
    tokens
        .iter()
        .map(|t| spans.iter().find(|s| s.start <= t.start && t.end <= s.end).map_or(EntityLabel::Other, |s| s.label))
        .collect()
}
