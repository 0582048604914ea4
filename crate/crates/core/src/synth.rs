//! Deterministic synthetic data: pre-tagged abstracts for pipeline runs and
//! random records for store tests. Same seed, same output.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::annotate::{paint_spans, EntityLabel, LabeledSpan};
use crate::corpus::{split_sentences, Document};
use crate::extract::TaggedDocument;
use crate::record::{MaterialPropertyRecord, MaterialRef, ParsedValue, RelationMode};
use crate::store::classify_materials;
use crate::tokenize::{wordpiece_tokenize, Vocabulary, CONTINUATION_PREFIX, DEFAULT_UNK};

const POLYMERS: &[(&str, &str)] = &[
    ("polystyrene", "PS"),
    ("poly(methyl methacrylate)", "PMMA"),
    ("poly(vinyl alcohol)", "PVA"),
    ("polyethylene", "PE"),
    ("poly(lactic acid)", "PLA"),
    ("polycaprolactone", "PCL"),
    ("poly(vinylidene fluoride)", "PVDF"),
    ("polyaniline", "PANI"),
];

const FILLERS: &[(&str, EntityLabel)] = &[
    ("SiO2", EntityLabel::InorganicMaterial),
    ("graphene oxide", EntityLabel::InorganicMaterial),
    ("TiO2", EntityLabel::InorganicMaterial),
    ("glycerol", EntityLabel::OrganicMaterial),
];

/// (property surface, unit surface, low, high)
const PROPERTIES: &[(&str, &str, f64, f64)] = &[
    ("Tg", "°C", -50.0, 250.0),
    ("glass transition temperature", "K", 250.0, 500.0),
    ("tensile strength", "MPa", 5.0, 120.0),
    ("tensile strength", "GPa", 0.01, 0.2),
    ("elongation at break", "%", 1.0, 800.0),
    ("ionic conductivity", "S cm^{-1}", 1e-6, 1e-2),
    ("molecular weight", "g/mol", 1e3, 5e5),
    ("melting temperature", "°C", 50.0, 300.0),
];

const WORDS: &[&str] = &[
    "films",
    "were",
    "prepared",
    "by",
    "solution",
    "casting",
    "The",
    "of",
    "was",
    "with",
    "showed",
    "a",
    "Blends",
    "and",
    "studied",
    "A",
    "obtained",
    "Polymer",
    "synthesized",
    "Steel",
    "samples",
    "tested",
    "at",
    "room",
    "temperature",
    "wt",
    "composites",
    "reached",
    "measured",
    "high",
];

/// A vocabulary covering every synthetic abstract: template words, entity
/// words, and single characters with their continuations.
pub fn synthetic_vocab() -> Vocabulary {
    let mut entries = vec![DEFAULT_UNK.to_string()];
    let mut words: Vec<&str> = WORDS.to_vec();
    for (long, short) in POLYMERS {
        words.extend(long.split(|c: char| !c.is_alphanumeric()));
        words.push(short);
    }
    for (f, _) in FILLERS {
        words.extend(f.split(' '));
    }
    for (p, _, _, _) in PROPERTIES {
        words.extend(p.split(' '));
    }
    entries.extend(words.iter().filter(|w| !w.is_empty()).map(|w| w.to_string()));
    entries.push("^{-1}".into());
    for c in "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789.,;:()%°±-+/×^{}_".chars() {
        entries.push(c.to_string());
        entries.push(format!("{CONTINUATION_PREFIX}{c}"));
    }
    entries.sort();
    entries.dedup();
    Vocabulary::new(entries, DEFAULT_UNK).expect("synthetic vocabulary is valid")
}

struct Builder {
    text: String,
    spans: Vec<LabeledSpan>,
}

impl Builder {
    fn plain(&mut self, s: &str) {
        self.text.push_str(s);
    }

    fn tagged(&mut self, s: &str, label: EntityLabel) {
        let start = self.text.chars().count();
        self.text.push_str(s);
        self.spans.push(LabeledSpan { start, end: start + s.chars().count(), label });
    }
}

fn value_text(rng: &mut ChaCha8Rng, unit: &str, lo: f64, hi: f64) -> String {
    let v = rng.gen_range(lo..hi);
    match rng.gen_range(0..4) {
        0 if hi <= 1.0 => {
            let exp = v.log10().floor() as i32;
            format!("{:.1} × 10^{{{exp}}} {unit}", v / 10f64.powi(exp))
        }
        1 => format!("{:.1} ± {:.1} {unit}", v, (v.abs() * 0.05).max(0.1)),
        2 => format!("{:.2}-{:.2} {unit}", v, v * 1.1),
        _ => format!("{v:.2} {unit}"),
    }
}

/// `n` pre-tagged abstracts. About one in ten lacks the "poly" cue.
pub fn synthetic_abstracts(n: usize, seed: u64) -> Vec<TaggedDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = synthetic_vocab();
    (0..n).map(|i| synthetic_abstract(&mut rng, &vocab, i)).collect()
}

fn synthetic_abstract(rng: &mut ChaCha8Rng, vocab: &Vocabulary, i: usize) -> TaggedDocument {
    use EntityLabel::*;
    let mut b = Builder { text: String::new(), spans: Vec::new() };
    if rng.gen_ratio(1, 10) {
        b.plain("Steel samples were tested at room temperature. The ");
        let (name, unit, lo, hi) = PROPERTIES[2];
        b.tagged(name, PropertyName);
        b.plain(" was ");
        b.tagged(&value_text(rng, unit, lo, hi), PropertyValue);
        b.plain(".");
    } else {
        let (long, short) = *POLYMERS.choose(rng).expect("non-empty");
        b.plain("Polymer ");
        b.tagged(long, Polymer);
        b.plain(" (");
        b.tagged(short, Polymer);
        b.plain(") was synthesized.");
        for _ in 0..rng.gen_range(2..6) {
            let (name, unit, lo, hi) = *PROPERTIES.choose(rng).expect("non-empty");
            b.plain(" ");
            match rng.gen_range(0..4) {
                0 => {
                    b.plain("The ");
                    b.tagged(name, PropertyName);
                    b.plain(" of ");
                    b.tagged(short, Polymer);
                    b.plain(" was ");
                    b.tagged(&value_text(rng, unit, lo, hi), PropertyValue);
                    b.plain(".");
                }
                1 => {
                    let (filler, label) = *FILLERS.choose(rng).expect("non-empty");
                    b.tagged(short, Polymer);
                    b.plain(" with ");
                    b.tagged(&format!("{} wt%", rng.gen_range(1..30)), MaterialAmount);
                    b.plain(" ");
                    b.tagged(filler, label);
                    b.plain(" showed a ");
                    b.tagged(name, PropertyName);
                    b.plain(" of ");
                    b.tagged(&value_text(rng, unit, lo, hi), PropertyValue);
                    b.plain(".");
                }
                2 => {
                    let (other, _) = *POLYMERS.choose(rng).expect("non-empty");
                    b.plain("Blends of ");
                    b.tagged(short, Polymer);
                    b.plain(" and ");
                    b.tagged(other, Polymer);
                    b.plain(" were studied. A ");
                    b.tagged(name, PropertyName);
                    b.plain(" of ");
                    b.tagged(&value_text(rng, unit, lo, hi), PropertyValue);
                    b.plain(" was obtained.");
                }
                _ => {
                    b.plain("The ");
                    b.tagged(name, PropertyName);
                    b.plain(" measured was ");
                    b.tagged("high", PropertyValue);
                    b.plain(".");
                }
            }
        }
    }
    let doc = Document {
        doc_id: format!("syn{i:06}"),
        title: String::new(),
        sentences: split_sentences(&b.text),
        text: b.text,
        year: Some(rng.gen_range(2000..2023)),
        doi: None,
    };
    let tokens = wordpiece_tokenize(&doc.text, vocab);
    let labels = paint_spans(&tokens, &b.spans);
    TaggedDocument { doc, tokens, labels }
}

pub const SYNTH_PROPERTIES: &[&str] = &[
    "glass transition temperature",
    "tensile strength",
    "elongation at break",
    "electrical conductivity",
    "melting temperature",
];

const SYNTH_MATERIALS: &[(&str, Option<&str>, EntityLabel)] = &[
    ("PS", Some("polystyrene"), EntityLabel::Polymer),
    ("polystyrene", Some("polystyrene"), EntityLabel::Polymer),
    ("PMMA", Some("poly(methyl methacrylate)"), EntityLabel::Polymer),
    ("PHA", None, EntityLabel::Polymer),
    ("pha", None, EntityLabel::Polymer),
    ("polyimides", None, EntityLabel::PolymerClass),
    ("SiO2", None, EntityLabel::InorganicMaterial),
    ("glycerol", None, EntityLabel::OrganicMaterial),
];

/// `n` random records over a small vocabulary of properties, materials,
/// years and documents, so filters have both hits and misses.
pub fn synthetic_records(n: usize, seed: u64) -> Vec<MaterialPropertyRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=3);
            let mut materials: Vec<MaterialRef> = SYNTH_MATERIALS
                .choose_multiple(&mut rng, k)
                .enumerate()
                .map(|(c, (s, norm, label))| MaterialRef {
                    surface: s.to_string(),
                    label: *label,
                    normalized: norm.map(str::to_string),
                    cluster: c,
                })
                .collect();
            materials.sort_by_key(|m| m.cluster);
            let property = SYNTH_PROPERTIES.choose(&mut rng).expect("non-empty").to_string();
            let numeric = (rng.gen_range(-100.0..500.0f64) * 10.0).round() / 10.0;
            let mut value = ParsedValue::new(numeric, "u");
            if rng.gen_ratio(9, 10) {
                value.canonical_numeric = Some(numeric);
                value.unit_canonical = Some("u".into());
            }
            MaterialPropertyRecord {
                doc_id: format!("doc{:04}", rng.gen_range(0..n.max(1) / 3 + 1)),
                year: if rng.gen_ratio(1, 20) { None } else { Some(rng.gen_range(2000..2023)) },
                doi: None,
                composition_class: classify_materials(&materials),
                materials,
                property_raw: property.clone(),
                property_canonical: property,
                value,
                amount: None,
                relation_mode: if rng.gen_bool(0.5) { RelationMode::SameSentence } else { RelationMode::WholeAbstract },
            }
        })
        .collect()
}
