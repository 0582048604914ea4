//! Material property records and their JSON-lines layout.

use serde::{Deserialize, Serialize};

use crate::annotate::EntityLabel;
use crate::text::fold_key;

/// A numeric value with its unit as written and, once converted, in the
/// property's canonical unit. `numeric`, `error` and `range` are in `unit_raw`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedValue {
    pub numeric: f64,
    pub unit_raw: String,
    pub canonical_numeric: Option<f64>,
    pub unit_canonical: Option<String>,
    pub error: Option<f64>,
    pub range: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical_range: Option<(f64, f64)>,
}

impl ParsedValue {
    pub fn new(numeric: f64, unit_raw: impl Into<String>) -> Self {
        ParsedValue {
            numeric,
            unit_raw: unit_raw.into(),
            canonical_numeric: None,
            unit_canonical: None,
            error: None,
            range: None,
            canonical_error: None,
            canonical_range: None,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical_numeric.is_some()
    }
}

/// One material cluster as it appears in a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialRef {
    pub surface: String,
    pub label: EntityLabel,
    pub normalized: Option<String>,
    pub cluster: usize,
}

impl MaterialRef {
    /// Identity used for counting and grouping: the normalized name when the
    /// dictionary knows it, the case-folded surface otherwise.
    pub fn key(&self) -> String {
        fold_key(self.normalized.as_deref().unwrap_or(&self.surface))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmountLink {
    pub material: String,
    pub cluster: usize,
    pub value: ParsedValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RelationMode {
    SameSentence,
    WholeAbstract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CompositionClass {
    Neat,
    Blend,
    Composite,
}

impl CompositionClass {
    pub const ALL: [CompositionClass; 3] =
        [CompositionClass::Neat, CompositionClass::Blend, CompositionClass::Composite];

    pub fn as_str(self) -> &'static str {
        match self {
            CompositionClass::Neat => "NEAT",
            CompositionClass::Blend => "BLEND",
            CompositionClass::Composite => "COMPOSITE",
        }
    }
}

impl std::str::FromStr for CompositionClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "NEAT" => Ok(CompositionClass::Neat),
            "BLEND" => Ok(CompositionClass::Blend),
            "COMPOSITE" => Ok(CompositionClass::Composite),
            _ => Err(format!("unknown composition class {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialPropertyRecord {
    pub doc_id: String,
    pub year: Option<i32>,
    pub doi: Option<String>,
    pub materials: Vec<MaterialRef>,
    pub property_raw: String,
    pub property_canonical: String,
    pub value: ParsedValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amount: Option<AmountLink>,
    pub relation_mode: RelationMode,
    pub composition_class: CompositionClass,
}
