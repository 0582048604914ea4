//! From tagged documents to material property records.
//!
//! [`Extractor::extract_records`] runs, per document: mention assembly, the
//! entity filter, abbreviation detection, coreference, name normalisation,
//! value parsing, unit conversion, property pairing, amount association and
//! the relation heuristic. Nothing here aborts a document; every dropped item
//! leaves a [`Diagnostic`].

pub mod coref;
pub mod quantity;
pub mod relate;
pub mod units;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::annotate::EntityLabel;
use crate::corpus::Document;
use crate::par::{self, Execution};
use crate::record::{AmountLink, MaterialPropertyRecord, MaterialRef, ParsedValue};
use crate::store::classify_materials;
use crate::tag::{assemble_mentions, EntityMention};
use crate::text::CharIndex;
use crate::tokenize::TokenSpan;

pub use coref::{
    coreference, detect_abbreviations, levenshtein, normalize_name, AbbreviationPair, Clustering, CorefConfig,
    NameDictionary, NormalizedName,
};
pub use quantity::{parse_property_value, ParseFailure};
pub use relate::{associate_amount, filter_by_entities, pair_property, relate, DEFAULT_WINDOW};
pub use units::{convert_amount, convert_units, normalize_unit, PropertySpec, UnconvertedUnit, UnitRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractConfig {
    /// Context window in words for property pairing and amount association.
    pub window: usize,
    pub coref: CorefConfig,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig { window: DEFAULT_WINDOW, coref: CorefConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Filter,
    ParseValue,
    ConvertUnits,
    PairProperty,
    AssociateAmount,
    Relate,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        f.write_str(&s)
    }
}

/// One line of the diagnostics sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub doc_id: String,
    pub stage: Stage,
    pub reason: String,
}

/// Pipeline bookkeeping. Counts add up across documents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractCounts {
    pub documents: usize,
    pub polymer_relevant: usize,
    pub passed_filter: usize,
    pub records: usize,
    pub parse_failures: usize,
    pub unpaired_values: usize,
    pub unconverted: usize,
    pub unlinked_amounts: usize,
}

impl AddAssign for ExtractCounts {
    fn add_assign(&mut self, o: Self) {
        self.documents += o.documents;
        self.polymer_relevant += o.polymer_relevant;
        self.passed_filter += o.passed_filter;
        self.records += o.records;
        self.parse_failures += o.parse_failures;
        self.unpaired_values += o.unpaired_values;
        self.unconverted += o.unconverted;
        self.unlinked_amounts += o.unlinked_amounts;
    }
}

impl fmt::Display for ExtractCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} in / {} passed filter / {} records / {} parse failures",
            self.documents, self.passed_filter, self.records, self.parse_failures
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extraction {
    pub records: Vec<MaterialPropertyRecord>,
    pub diagnostics: Vec<Diagnostic>,
    pub counts: ExtractCounts,
}

impl Extraction {
    pub fn append(&mut self, other: Extraction) {
        self.records.extend(other.records);
        self.diagnostics.extend(other.diagnostics);
        self.counts += other.counts;
    }
}

/// A document with its tokens and one label per token.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedDocument {
    pub doc: Document,
    pub tokens: Vec<TokenSpan>,
    pub labels: Vec<EntityLabel>,
}

/// Immutable extraction context, shared by all workers.
#[derive(Debug, Clone)]
pub struct Extractor {
    pub registry: UnitRegistry,
    pub names: NameDictionary,
    pub config: ExtractConfig,
}

impl Default for Extractor {
    fn default() -> Self {
        Extractor {
            registry: UnitRegistry::shipped().clone(),
            names: NameDictionary::shipped().clone(),
            config: ExtractConfig::default(),
        }
    }
}

struct Log<'a> {
    doc_id: &'a str,
    diagnostics: Vec<Diagnostic>,
}

impl Log<'_> {
    fn push(&mut self, stage: Stage, reason: String) {
        self.diagnostics.push(Diagnostic { doc_id: self.doc_id.to_string(), stage, reason });
    }
}

/// Cluster-level view used when building records.
struct ClusterInfo {
    surface: String,
    label: EntityLabel,
    normalized: Option<String>,
}

impl Extractor {
    pub fn new(registry: UnitRegistry, names: NameDictionary, config: ExtractConfig) -> Self {
        Extractor { registry, names, config }
    }

    /// Runs the relevance filters and, for qualifying documents, the record
    /// extraction.
    pub fn process(&self, doc: &Document, tokens: &[TokenSpan], labels: &[EntityLabel]) -> Extraction {
        let mut out = Extraction { counts: ExtractCounts { documents: 1, ..Default::default() }, ..Default::default() };
        if !doc.is_polymer_relevant() {
            out.diagnostics.push(Diagnostic {
                doc_id: doc.doc_id.clone(),
                stage: Stage::Filter,
                reason: "no \"poly\" in text".into(),
            });
            return out;
        }
        let mut inner = self.extract_records(doc, tokens, labels);
        inner.counts.documents = 1;
        inner.counts.polymer_relevant = 1;
        inner
    }

    /// Records of one document that already passed the corpus filters.
    pub fn extract_records(&self, doc: &Document, tokens: &[TokenSpan], labels: &[EntityLabel]) -> Extraction {
        let mut log = Log { doc_id: &doc.doc_id, diagnostics: Vec::new() };
        let mut counts = ExtractCounts::default();
        let mut mentions = assemble_mentions(doc, tokens, labels);
        if !filter_by_entities(&mentions) {
            log.push(Stage::Filter, "missing polymer-family, PROPERTY_NAME or PROPERTY_VALUE entity".into());
            return Extraction { records: Vec::new(), diagnostics: log.diagnostics, counts };
        }
        counts.passed_filter = 1;

        let clusters = self.cluster_materials(doc, &mut mentions);

        // values that fail to parse leave the pairing pool
        let mut parsed: BTreeMap<usize, ParsedValue> = BTreeMap::new();
        for (i, m) in mentions.iter().enumerate() {
            if !matches!(m.label, EntityLabel::PropertyValue | EntityLabel::MaterialAmount) {
                continue;
            }
            match parse_property_value(&m.surface) {
                Ok(v) => {
                    parsed.insert(i, v);
                }
                Err(e) => {
                    counts.parse_failures += 1;
                    log.push(Stage::ParseValue, e.to_string());
                }
            }
        }
        let pool: Vec<usize> = (0..mentions.len())
            .filter(|i| {
                parsed.contains_key(i)
                    || !matches!(mentions[*i].label, EntityLabel::PropertyValue | EntityLabel::MaterialAmount)
            })
            .collect();
        let pooled: Vec<EntityMention> = pool.iter().map(|&i| mentions[i].clone()).collect();

        let pairing = pair_property(&pooled, self.config.window);
        for &v in &pairing.unpaired {
            counts.unpaired_values += 1;
            log.push(
                Stage::PairProperty,
                format!("no PROPERTY_NAME within {} words of {:?}", self.config.window, pooled[v].surface),
            );
        }
        for (n, count) in pairing.multi_consumed() {
            log.push(Stage::PairProperty, format!("PROPERTY_NAME {:?} paired with {count} values", pooled[n].surface));
        }

        let amounts = associate_amount(&pooled, self.config.window);
        for &a in &amounts.unlinked {
            counts.unlinked_amounts += 1;
            log.push(
                Stage::AssociateAmount,
                format!("no material within {} words of {:?}", self.config.window, pooled[a].surface),
            );
        }

        let relations = relate(&pooled, &pairing.pairs);
        if relations.len() < pairing.pairs.len() {
            log.push(Stage::Relate, "property/value pair without material clusters".into());
        }

        let mut records = Vec::with_capacity(relations.len());
        for rel in relations {
            let name = &pooled[rel.name];
            let value_mention = &pooled[rel.value];
            let raw = &parsed[&pool[rel.value]];
            let value = match self.registry.property(&name.surface) {
                Some(spec) => match convert_units(raw, spec) {
                    Ok(v) => v,
                    Err(e) => {
                        counts.unconverted += 1;
                        log.push(Stage::ConvertUnits, e.to_string());
                        raw.clone()
                    }
                },
                None => {
                    counts.unconverted += 1;
                    log.push(Stage::ConvertUnits, format!("unknown property {:?}", name.surface));
                    raw.clone()
                }
            };
            let materials: Vec<MaterialRef> = rel
                .clusters
                .iter()
                .map(|&c| MaterialRef {
                    surface: clusters[c].surface.clone(),
                    label: clusters[c].label,
                    normalized: clusters[c].normalized.clone(),
                    cluster: c,
                })
                .collect();
            let amount = self.pick_amount(&pooled, &amounts.links, &rel.clusters, value_mention).map(|a| {
                let material = &pooled[a.1];
                let c = material.cluster_id.unwrap_or_default();
                AmountLink {
                    material: clusters[c].surface.clone(),
                    cluster: c,
                    value: convert_amount(&parsed[&pool[a.0]], &self.registry),
                }
            });
            records.push(MaterialPropertyRecord {
                doc_id: doc.doc_id.clone(),
                year: doc.year,
                doi: doc.doi.clone(),
                composition_class: classify_materials(&materials),
                materials,
                property_raw: name.surface.clone(),
                property_canonical: self.registry.canonical_name(&name.surface),
                value,
                amount,
                relation_mode: rel.mode,
            });
        }
        counts.records = records.len();
        Extraction { records, diagnostics: log.diagnostics, counts }
    }

    /// Abbreviation detection, coreference and normalisation over the
    /// material mentions; fills `cluster_id` and `normalized_name`.
    fn cluster_materials(&self, doc: &Document, mentions: &mut [EntityMention]) -> Vec<ClusterInfo> {
        let material_idx: Vec<usize> = (0..mentions.len()).filter(|&i| mentions[i].label.is_material()).collect();
        let materials: Vec<EntityMention> = material_idx.iter().map(|&i| mentions[i].clone()).collect();

        let mut pairs = Vec::new();
        if self.config.coref.use_abbreviations {
            let idx = CharIndex::new(&doc.text);
            for (s, &(start, end)) in doc.sentences.iter().enumerate() {
                let local: Vec<usize> = (0..materials.len()).filter(|&i| materials[i].sentence_index == s).collect();
                if local.len() < 2 {
                    continue;
                }
                let in_sentence: Vec<EntityMention> = local.iter().map(|&i| materials[i].clone()).collect();
                for p in detect_abbreviations(idx.slice(start, end), start, &in_sentence) {
                    pairs.push(AbbreviationPair { long: local[p.long], short: local[p.short] });
                }
            }
        }

        let clustering = coreference(&materials, &pairs, &self.config.coref);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); clustering.representatives.len()];
        for (k, &c) in clustering.cluster_of.iter().enumerate() {
            members[c].push(k);
        }
        let mut info = Vec::with_capacity(members.len());
        for (c, group) in members.iter().enumerate() {
            let rep = &clustering.representatives[c];
            let normalized = self
                .names
                .get(rep)
                .or_else(|| group.iter().find_map(|&k| self.names.get(&materials[k].surface)))
                .map(str::to_string);
            let mut freq: BTreeMap<EntityLabel, usize> = BTreeMap::new();
            for &k in group {
                *freq.entry(materials[k].label).or_default() += 1;
            }
            let label = freq.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(l, _)| *l).unwrap_or_default();
            info.push(ClusterInfo { surface: rep.clone(), label, normalized });
        }
        for (k, &i) in material_idx.iter().enumerate() {
            let c = clustering.cluster_of[k];
            mentions[i].cluster_id = Some(c);
            mentions[i].normalized_name =
                Some(normalize_name(&mentions[i].surface, &self.names)).filter(|n| n.normalized).map(|n| n.name);
        }
        info
    }

    /// The amount linked to one of the record's clusters, preferring the
    /// value's sentence, then proximity to the value, then the earlier one.
    fn pick_amount(
        &self,
        mentions: &[EntityMention],
        links: &[(usize, usize)],
        clusters: &[usize],
        value: &EntityMention,
    ) -> Option<(usize, usize)> {
        links
            .iter()
            .copied()
            .filter(|&(_, mi)| mentions[mi].cluster_id.is_some_and(|c| clusters.contains(&c)))
            .min_by_key(|&(ai, _)| {
                let a = &mentions[ai];
                (a.sentence_index != value.sentence_index, a.word_distance(value), a.start)
            })
    }

    /// Extracts a whole corpus. Output order follows input order whether or
    /// not the work runs in parallel.
    pub fn extract_corpus(&self, docs: &[TaggedDocument], execution: Execution) -> Extraction {
        let parts = par::map(execution, docs, |d| self.process(&d.doc, &d.tokens, &d.labels));
        let mut out = Extraction::default();
        for p in parts {
            out.append(p);
        }
        out
    }
}
