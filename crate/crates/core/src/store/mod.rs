//! Append-only record store with in-memory indexes, composition classes,
//! analytics and paginated queries.

mod analytics;
pub mod export;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::EntityLabel;
use crate::jsonl::{self, JsonlError};
use crate::record::{CompositionClass, MaterialPropertyRecord, MaterialRef};
use crate::text::fold_key;

pub use analytics::{
    composition_counts, count_unique_polymers, property_histogram, scatter_pairs, yearly_counts, CompositionCounts,
    ScatterPoint, ScatterScope, UNKNOWN_YEAR,
};

pub const MAX_PAGE_SIZE: usize = 1000;

/// COMPOSITE if any cluster is not POLYMER or POLYMER_CLASS, BLEND if two or
/// more clusters are POLYMER, NEAT otherwise.
pub fn classify_materials(materials: &[MaterialRef]) -> CompositionClass {
    if materials.iter().any(|m| !matches!(m.label, EntityLabel::Polymer | EntityLabel::PolymerClass)) {
        return CompositionClass::Composite;
    }
    let polymers: BTreeSet<usize> =
        materials.iter().filter(|m| m.label == EntityLabel::Polymer).map(|m| m.cluster).collect();
    if polymers.len() >= 2 {
        CompositionClass::Blend
    } else {
        CompositionClass::Neat
    }
}

pub fn classify_record(record: &MaterialPropertyRecord) -> CompositionClass {
    classify_materials(&record.materials)
}

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("malformed {field} range: {lo} > {hi}")]
    MalformedRange { field: &'static str, lo: String, hi: String },
    #[error("page_size must be in 1..={MAX_PAGE_SIZE}, got {0}")]
    PageSize(usize),
    #[error("page numbers start at 1")]
    Page,
}

/// Conjunctive record filter; `None` fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordFilter {
    /// Canonical property name, compared case-insensitively.
    pub property: Option<String>,
    /// Matches a material's normalized name or surface, case-insensitively.
    pub material: Option<String>,
    /// Inclusive bounds on the canonical value.
    pub value_range: Option<(f64, f64)>,
    /// Inclusive bounds on the publication year.
    pub year_range: Option<(i32, i32)>,
    pub class: Option<CompositionClass>,
    /// Case-insensitive substring of the abstract (or, when the abstract is
    /// not loaded, of the record's property and material surfaces).
    pub keyword: Option<String>,
}

impl RecordFilter {
    pub fn validate(&self) -> Result<(), QueryError> {
        if let Some((lo, hi)) = self.value_range {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(QueryError::MalformedRange { field: "value", lo: lo.to_string(), hi: hi.to_string() });
            }
        }
        if let Some((lo, hi)) = self.year_range {
            if lo > hi {
                return Err(QueryError::MalformedRange { field: "year", lo: lo.to_string(), hi: hi.to_string() });
            }
        }
        Ok(())
    }
}

/// A filter with its string fields folded once.
struct Prepared<'a> {
    filter: &'a RecordFilter,
    property: Option<String>,
    material: Option<String>,
    keyword: Option<String>,
}

impl<'a> Prepared<'a> {
    fn new(filter: &'a RecordFilter) -> Self {
        Prepared {
            filter,
            property: filter.property.as_deref().map(fold_key),
            material: filter.material.as_deref().map(fold_key),
            keyword: filter.keyword.as_deref().map(fold_key),
        }
    }

    fn matches(&self, r: &MaterialPropertyRecord, text: Option<&str>) -> bool {
        if self.property.as_ref().is_some_and(|p| *p != fold_key(&r.property_canonical)) {
            return false;
        }
        if let Some(m) = &self.material {
            if !material_keys(r).contains(m) {
                return false;
            }
        }
        if let Some((lo, hi)) = self.filter.value_range {
            if !r.value.canonical_numeric.is_some_and(|v| lo <= v && v <= hi) {
                return false;
            }
        }
        if let Some((lo, hi)) = self.filter.year_range {
            if !r.year.is_some_and(|y| lo <= y && y <= hi) {
                return false;
            }
        }
        if self.filter.class.is_some_and(|c| c != r.composition_class) {
            return false;
        }
        if let Some(k) = &self.keyword {
            let found = match text {
                Some(t) => t.contains(k.as_str()),
                None => record_text(r).contains(k.as_str()),
            };
            if !found {
                return false;
            }
        }
        true
    }
}

/// Keys under which a record is indexed by material.
fn material_keys(r: &MaterialPropertyRecord) -> BTreeSet<String> {
    r.materials.iter().flat_map(|m| [m.key(), fold_key(&m.surface)]).collect()
}

fn record_text(r: &MaterialPropertyRecord) -> String {
    let mut parts = vec![r.property_raw.as_str(), r.property_canonical.as_str()];
    parts.extend(r.materials.iter().map(|m| m.surface.as_str()));
    fold_key(&parts.join(" "))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryPage {
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
    pub records: Vec<MaterialPropertyRecord>,
}

#[derive(Debug, Clone, Default)]
pub struct RecordStore {
    records: Vec<MaterialPropertyRecord>,
    by_property: BTreeMap<String, Vec<usize>>,
    by_material: BTreeMap<String, Vec<usize>>,
    by_year: BTreeMap<Option<i32>, Vec<usize>>,
    doc_text: HashMap<String, String>,
}

impl RecordStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: Vec<MaterialPropertyRecord>) -> Self {
        let mut s = Self::new();
        s.append(records);
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, JsonlError> {
        Ok(Self::from_records(jsonl::read(path)?))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), JsonlError> {
        jsonl::write(path, &self.records)
    }

    /// Appends a batch and extends the indexes.
    pub fn append(&mut self, batch: impl IntoIterator<Item = MaterialPropertyRecord>) {
        for r in batch {
            let i = self.records.len();
            self.by_property.entry(fold_key(&r.property_canonical)).or_default().push(i);
            for k in material_keys(&r) {
                self.by_material.entry(k).or_default().push(i);
            }
            self.by_year.entry(r.year).or_default().push(i);
            self.records.push(r);
        }
    }

    /// Registers abstract texts for keyword filters.
    pub fn attach_texts<I, S, T>(&mut self, texts: I)
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        for (id, text) in texts {
            self.doc_text.insert(id.into(), fold_key(text.as_ref()));
        }
    }

    pub fn records(&self) -> &[MaterialPropertyRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Canonical property names present, as stored.
    pub fn known_properties(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.property_canonical.as_str()).collect()
    }

    pub fn has_property(&self, name: &str) -> bool {
        self.by_property.contains_key(&fold_key(name))
    }

    fn candidates(&self, p: &Prepared) -> Vec<usize> {
        let mut lists: Vec<Vec<usize>> = Vec::new();
        if let Some(prop) = &p.property {
            lists.push(self.by_property.get(prop).cloned().unwrap_or_default());
        }
        if let Some(m) = &p.material {
            lists.push(self.by_material.get(m).cloned().unwrap_or_default());
        }
        if let Some((lo, hi)) = p.filter.year_range {
            let mut ids: Vec<usize> =
                self.by_year.range(Some(lo)..=Some(hi)).flat_map(|(_, v)| v.iter().copied()).collect();
            ids.sort_unstable();
            lists.push(ids);
        }
        lists.into_iter().min_by_key(Vec::len).unwrap_or_else(|| (0..self.records.len()).collect())
    }

    /// Indices of matching records in insertion order.
    pub fn matching(&self, filter: &RecordFilter) -> Result<Vec<usize>, QueryError> {
        filter.validate()?;
        let p = Prepared::new(filter);
        Ok(self
            .candidates(&p)
            .into_iter()
            .filter(|&i| {
                let r = &self.records[i];
                p.matches(r, self.doc_text.get(&r.doc_id).map(String::as_str))
            })
            .collect())
    }

    pub fn filtered(&self, filter: &RecordFilter) -> Result<Vec<&MaterialPropertyRecord>, QueryError> {
        Ok(self.matching(filter)?.into_iter().map(|i| &self.records[i]).collect())
    }

    /// Matching records ordered by year (newest first, unknown last), then
    /// doc_id, then insertion order. `page` is 1-based; a page past the end
    /// is empty and still reports the total.
    pub fn query(&self, filter: &RecordFilter, page: usize, page_size: usize) -> Result<QueryPage, QueryError> {
        if !(1..=MAX_PAGE_SIZE).contains(&page_size) {
            return Err(QueryError::PageSize(page_size));
        }
        if page == 0 {
            return Err(QueryError::Page);
        }
        let mut ids = self.matching(filter)?;
        ids.sort_by(|&a, &b| {
            let (ra, rb) = (&self.records[a], &self.records[b]);
            rb.year
                .is_some()
                .cmp(&ra.year.is_some())
                .then(rb.year.cmp(&ra.year))
                .then(ra.doc_id.cmp(&rb.doc_id))
                .then(a.cmp(&b))
        });
        let total = ids.len();
        let records = ids
            .into_iter()
            .skip((page - 1).saturating_mul(page_size))
            .take(page_size)
            .map(|i| self.records[i].clone())
            .collect();
        Ok(QueryPage { total, page, page_size, records })
    }

    pub fn yearly_counts(&self, filter: &RecordFilter) -> Result<BTreeMap<String, usize>, QueryError> {
        Ok(yearly_counts(self.filtered(filter)?))
    }

    pub fn property_histogram(&self, min_count: usize) -> Vec<(String, usize)> {
        property_histogram(&self.records, min_count)
    }

    pub fn composition_counts(&self) -> CompositionCounts {
        composition_counts(&self.records)
    }

    pub fn count_unique_polymers(&self) -> usize {
        count_unique_polymers(&self.records)
    }

    /// Errors with the offending name when a property has no records.
    pub fn scatter_pairs(&self, x: &str, y: &str, scope: ScatterScope) -> Result<Vec<ScatterPoint>, String> {
        for p in [x, y] {
            if !self.has_property(p) {
                return Err(p.to_string());
            }
        }
        Ok(scatter_pairs(&self.records, x, y, scope))
    }
}
