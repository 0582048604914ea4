use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::record::{CompositionClass, MaterialPropertyRecord};
use crate::text::fold_key;

/// Bucket for records without a publication year.
pub const UNKNOWN_YEAR: &str = "unknown";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionCounts {
    pub neat: usize,
    pub blend: usize,
    pub composite: usize,
    pub total: usize,
}

pub fn composition_counts(records: &[MaterialPropertyRecord]) -> CompositionCounts {
    let mut c = CompositionCounts { total: records.len(), ..Default::default() };
    for r in records {
        match r.composition_class {
            CompositionClass::Neat => c.neat += 1,
            CompositionClass::Blend => c.blend += 1,
            CompositionClass::Composite => c.composite += 1,
        }
    }
    c
}

/// Distinct polymers over NEAT records: normalized names as they are, plus
/// case-folded surfaces of materials the dictionary did not normalize.
pub fn count_unique_polymers(records: &[MaterialPropertyRecord]) -> usize {
    let mut normalized: BTreeSet<&str> = BTreeSet::new();
    let mut raw: BTreeSet<String> = BTreeSet::new();
    for r in records.iter().filter(|r| r.composition_class == CompositionClass::Neat) {
        for m in &r.materials {
            match &m.normalized {
                Some(n) => {
                    normalized.insert(n);
                }
                None => {
                    raw.insert(fold_key(&m.surface));
                }
            }
        }
    }
    normalized.len() + raw.len()
}

/// Records per canonical property with at least `min_count` records, most
/// frequent first, ties by name.
pub fn property_histogram(records: &[MaterialPropertyRecord], min_count: usize) -> Vec<(String, usize)> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for r in records {
        *counts.entry(&r.property_canonical).or_default() += 1;
    }
    let mut out: Vec<(String, usize)> =
        counts.into_iter().filter(|&(_, c)| c >= min_count).map(|(p, c)| (p.to_string(), c)).collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Records per publication year; missing years count under [`UNKNOWN_YEAR`].
pub fn yearly_counts<'a>(records: impl IntoIterator<Item = &'a MaterialPropertyRecord>) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for r in records {
        let key = r.year.map_or_else(|| UNKNOWN_YEAR.to_string(), |y| y.to_string());
        *out.entry(key).or_default() += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScatterScope {
    /// Pair values reported for the same document and the same material set.
    SameRecordMaterials,
    /// Pair values reported anywhere in the same document.
    SameDocument,
}

impl std::str::FromStr for ScatterScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SAME_RECORD_MATERIALS" => Ok(ScatterScope::SameRecordMaterials),
            "SAME_DOCUMENT" => Ok(ScatterScope::SameDocument),
            _ => Err(format!("unknown scatter scope {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    pub doc_id: String,
    pub year: Option<i32>,
}

/// One (x, y) pair per scope group holding canonical values of both
/// properties: the first x and the first y record of the group. Groups come
/// out in order of first appearance.
pub fn scatter_pairs(records: &[MaterialPropertyRecord], x: &str, y: &str, scope: ScatterScope) -> Vec<ScatterPoint> {
    let (x, y) = (fold_key(x), fold_key(y));
    let mut groups: Vec<(Option<f64>, Option<f64>, &MaterialPropertyRecord)> = Vec::new();
    let mut index: HashMap<(String, Vec<String>), usize> = HashMap::new();
    for r in records {
        let Some(v) = r.value.canonical_numeric else {
            continue;
        };
        let prop = fold_key(&r.property_canonical);
        let (is_x, is_y) = (prop == x, prop == y);
        if !is_x && !is_y {
            continue;
        }
        let materials = match scope {
            ScatterScope::SameDocument => Vec::new(),
            ScatterScope::SameRecordMaterials => {
                let set: BTreeSet<String> = r.materials.iter().map(|m| m.key()).collect();
                set.into_iter().collect()
            }
        };
        let g = *index.entry((r.doc_id.clone(), materials)).or_insert_with(|| {
            groups.push((None, None, r));
            groups.len() - 1
        });
        let slot = &mut groups[g];
        if is_x && slot.0.is_none() {
            slot.0 = Some(v);
        }
        if is_y && slot.1.is_none() {
            slot.1 = Some(v);
        }
    }
    groups
        .into_iter()
        .filter_map(|(gx, gy, r)| Some(ScatterPoint { x: gx?, y: gy?, doc_id: r.doc_id.clone(), year: r.year }))
        .collect()
}
