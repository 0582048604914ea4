#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use polyrec::annotate::{paint_spans, LabeledSpan};
use polyrec::corpus::{preprocess, RawDocument};
use polyrec::extract::TaggedDocument;
use polyrec::record::MaterialPropertyRecord;
use polyrec::store::RecordFilter;
use polyrec::tokenize::{load_vocab, wordpiece_tokenize, Vocabulary, CONTINUATION_PREFIX};
use polyrec::EntityLabel;
use serde::Deserialize;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

#[derive(Deserialize)]
struct Entity {
    surface: String,
    label: EntityLabel,
}

#[derive(Deserialize)]
struct Annotation {
    doc_id: String,
    entities: Vec<Entity>,
}

pub fn golden_vocab() -> Vocabulary {
    load_vocab(fixture("golden/vocab.txt")).expect("golden vocab")
}

/// Preprocesses the golden corpus and paints its hand annotations. Each
/// annotation lists entity surfaces in reading order; they are located
/// left to right in the preprocessed text.
pub fn golden_documents() -> Vec<TaggedDocument> {
    let raw: Vec<RawDocument> = polyrec::jsonl::read(fixture("golden/corpus.jsonl")).expect("golden corpus");
    let ann: Vec<Annotation> = polyrec::jsonl::read(fixture("golden/annotations.jsonl")).expect("golden annotations");
    let vocab = golden_vocab();
    raw.iter()
        .zip(&ann)
        .map(|(r, a)| {
            assert_eq!(r.doc_id, a.doc_id);
            let doc = preprocess(r);
            let chars: Vec<char> = doc.text.chars().collect();
            let mut from = 0;
            let mut spans = Vec::new();
            for e in &a.entities {
                let needle: Vec<char> = e.surface.chars().collect();
                let start = (from..=chars.len().saturating_sub(needle.len()))
                    .find(|&i| chars[i..i + needle.len()] == needle[..])
                    .unwrap_or_else(|| panic!("{}: {:?} not found in {:?}", a.doc_id, e.surface, doc.text));
                spans.push(LabeledSpan { start, end: start + needle.len(), label: e.label });
                from = start + needle.len();
            }
            let tokens = wordpiece_tokenize(&doc.text, &vocab);
            let labels = paint_spans(&tokens, &spans);
            TaggedDocument { doc, tokens, labels }
        })
        .collect()
}

/// One row of the hand-worked expected records table.
#[derive(Debug, Clone)]
pub struct ExpectedRecord {
    pub doc_id: String,
    pub property_raw: String,
    pub property_canonical: String,
    pub numeric: f64,
    pub unit_raw: String,
    pub canonical: Option<(f64, String)>,
    /// (surface, label, normalized)
    pub materials: Vec<(String, String, Option<String>)>,
    pub relation_mode: String,
    pub class: String,
    /// (material, value, canonical unit)
    pub amount: Option<(String, f64, String)>,
}

fn dash(s: &str) -> Option<&str> {
    (s != "-").then_some(s)
}

pub fn expected_records() -> Vec<ExpectedRecord> {
    let src = std::fs::read_to_string(fixture("golden/expected_records.tsv")).expect("expected records");
    src.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            assert_eq!(f.len(), 11, "bad row {l:?}");
            let canonical = dash(f[5]).map(|v| (v.parse().unwrap(), f[6].to_string()));
            let materials = f[7]
                .split("; ")
                .map(|m| {
                    let p: Vec<&str> = m.split('|').collect();
                    (p[0].to_string(), p[1].to_string(), dash(p[2]).map(str::to_string))
                })
                .collect();
            let amount = dash(f[10]).map(|a| {
                let p: Vec<&str> = a.split('|').collect();
                (p[0].to_string(), p[1].parse().unwrap(), p[2].to_string())
            });
            ExpectedRecord {
                doc_id: f[0].into(),
                property_raw: f[1].into(),
                property_canonical: f[2].into(),
                numeric: f[3].parse().unwrap(),
                unit_raw: f[4].into(),
                canonical,
                materials,
                relation_mode: f[8].into(),
                class: f[9].into(),
                amount,
            }
        })
        .collect()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

/// Differences between an extracted record and its expected row; empty when
/// they agree. Numbers are compared at relative tolerance `rel`.
pub fn record_mismatches(got: &MaterialPropertyRecord, want: &ExpectedRecord, rel: f64) -> Vec<String> {
    let mut out = Vec::new();
    let mut check = |what: &str, ok: bool, g: String, w: String| {
        if !ok {
            out.push(format!("{what}: got {g}, want {w}"));
        }
    };
    check("doc_id", got.doc_id == want.doc_id, got.doc_id.clone(), want.doc_id.clone());
    check("property_raw", got.property_raw == want.property_raw, got.property_raw.clone(), want.property_raw.clone());
    check(
        "property_canonical",
        got.property_canonical == want.property_canonical,
        got.property_canonical.clone(),
        want.property_canonical.clone(),
    );
    check(
        "numeric",
        close(got.value.numeric, want.numeric, rel),
        got.value.numeric.to_string(),
        want.numeric.to_string(),
    );
    check("unit_raw", got.value.unit_raw == want.unit_raw, got.value.unit_raw.clone(), want.unit_raw.clone());
    let canon_ok = match (&got.value.canonical_numeric, &got.value.unit_canonical, &want.canonical) {
        (None, None, None) => true,
        (Some(v), Some(u), Some((wv, wu))) => close(*v, *wv, rel) && u == wu,
        _ => false,
    };
    check(
        "canonical",
        canon_ok,
        format!("{:?} {:?}", got.value.canonical_numeric, got.value.unit_canonical),
        format!("{:?}", want.canonical),
    );
    let mats: Vec<(String, String, Option<String>)> =
        got.materials.iter().map(|m| (m.surface.clone(), m.label.as_str().to_string(), m.normalized.clone())).collect();
    check("materials", mats == want.materials, format!("{mats:?}"), format!("{:?}", want.materials));
    let mode = serde_json::to_value(got.relation_mode).unwrap().as_str().unwrap().to_string();
    check("relation_mode", mode == want.relation_mode, mode.clone(), want.relation_mode.clone());
    check(
        "class",
        got.composition_class.as_str() == want.class,
        got.composition_class.as_str().into(),
        want.class.clone(),
    );
    let amount_ok = match (&got.amount, &want.amount) {
        (None, None) => true,
        (Some(a), Some((m, v, u))) => {
            a.material == *m
                && a.value.canonical_numeric.is_some_and(|x| close(x, *v, rel))
                && a.value.unit_canonical.as_deref() == Some(u.as_str())
        }
        _ => false,
    };
    check(
        "amount",
        amount_ok,
        format!("{:?}", got.amount.as_ref().map(|a| (&a.material, &a.value))),
        format!("{:?}", want.amount),
    );
    out
}

/// Segmentation oracle: enumerates every complete segmentation of `word`
/// into vocabulary pieces and keeps the one in which each piece is the
/// longest piece available at its position. `None` means the word is unknown.
pub fn oracle_segment(word: &str, vocab: &Vocabulary) -> Option<Vec<String>> {
    let chars: Vec<char> = word.chars().collect();
    fn piece(chars: &[char], s: usize, e: usize) -> String {
        let body: String = chars[s..e].iter().collect();
        if s == 0 {
            body
        } else {
            format!("{CONTINUATION_PREFIX}{body}")
        }
    }
    fn all(
        chars: &[char],
        pos: usize,
        vocab: &Vocabulary,
        acc: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if pos == chars.len() {
            out.push(acc.clone());
            return;
        }
        for end in pos + 1..=chars.len() {
            if vocab.contains(&piece(chars, pos, end)) {
                acc.push((pos, end));
                all(chars, end, vocab, acc, out);
                acc.pop();
            }
        }
    }
    if chars.is_empty() {
        return None;
    }
    let mut segs = Vec::new();
    all(&chars, 0, vocab, &mut Vec::new(), &mut segs);
    segs.into_iter()
        .find(|seg| {
            seg.iter().all(|&(s, e)| (e + 1..=chars.len()).all(|longer| !vocab.contains(&piece(&chars, s, longer))))
        })
        .map(|seg| seg.into_iter().map(|(s, e)| piece(&chars, s, e)).collect())
}

/// Cohen's kappa from a full contingency table.
pub fn oracle_cohen<T: Ord + Clone>(a: &[T], b: &[T]) -> f64 {
    let cats: BTreeSet<T> = a.iter().chain(b).cloned().collect();
    let cats: Vec<T> = cats.into_iter().collect();
    let n = a.len() as f64;
    let mut table = vec![vec![0.0; cats.len()]; cats.len()];
    for (x, y) in a.iter().zip(b) {
        let i = cats.iter().position(|c| c == x).unwrap();
        let j = cats.iter().position(|c| c == y).unwrap();
        table[i][j] += 1.0;
    }
    let p_o: f64 = (0..cats.len()).map(|i| table[i][i]).sum::<f64>() / n;
    let mut p_e = 0.0;
    for i in 0..cats.len() {
        let row: f64 = table[i].iter().sum();
        let col: f64 = table.iter().map(|r| r[i]).sum();
        p_e += row * col / (n * n);
    }
    if p_o == 1.0 || p_e >= 1.0 {
        1.0
    } else {
        (p_o - p_e) / (1.0 - p_e)
    }
}

/// Fleiss' kappa from raw per-rater assignments: observed agreement as the
/// share of agreeing ordered rater pairs per item.
pub fn oracle_fleiss(ratings: &[Vec<usize>], categories: usize) -> f64 {
    let items = ratings.len() as f64;
    let raters = ratings[0].len();
    let mut p_bar = 0.0;
    let mut totals = vec![0.0; categories];
    for item in ratings {
        let mut agree = 0usize;
        for i in 0..raters {
            totals[item[i]] += 1.0;
            for j in 0..raters {
                if i != j && item[i] == item[j] {
                    agree += 1;
                }
            }
        }
        p_bar += agree as f64 / (raters * (raters - 1)) as f64;
    }
    p_bar /= items;
    let p_e: f64 = totals.iter().map(|t| (t / (items * raters as f64)).powi(2)).sum();
    if p_bar == 1.0 || p_e >= 1.0 {
        1.0
    } else {
        (p_bar - p_e) / (1.0 - p_e)
    }
}

/// Linear-scan query: filter every record, then sort.
pub fn oracle_query<'a>(
    records: &'a [MaterialPropertyRecord],
    f: &RecordFilter,
    texts: &BTreeMap<String, String>,
) -> Vec<&'a MaterialPropertyRecord> {
    let lower = |s: &str| s.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ");
    let mut hits: Vec<(usize, &MaterialPropertyRecord)> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            if let Some(p) = &f.property {
                if lower(p) != lower(&r.property_canonical) {
                    return false;
                }
            }
            if let Some(m) = &f.material {
                let m = lower(m);
                let any = r.materials.iter().any(|x| {
                    lower(&x.surface) == m
                        || x.normalized.as_deref().map(lower).unwrap_or_else(|| lower(&x.surface)) == m
                });
                if !any {
                    return false;
                }
            }
            if let Some((lo, hi)) = f.value_range {
                match r.value.canonical_numeric {
                    Some(v) if v >= lo && v <= hi => {}
                    _ => return false,
                }
            }
            if let Some((lo, hi)) = f.year_range {
                match r.year {
                    Some(y) if y >= lo && y <= hi => {}
                    _ => return false,
                }
            }
            if let Some(c) = f.class {
                if r.composition_class != c {
                    return false;
                }
            }
            if let Some(k) = &f.keyword {
                let hay = match texts.get(&r.doc_id) {
                    Some(t) => lower(t),
                    None => {
                        let mut s = format!("{} {}", r.property_raw, r.property_canonical);
                        for m in &r.materials {
                            s.push(' ');
                            s.push_str(&m.surface);
                        }
                        lower(&s)
                    }
                };
                if !hay.contains(&lower(k)) {
                    return false;
                }
            }
            true
        })
        .collect();
    hits.sort_by(|(ia, a), (ib, b)| {
        let ka = (a.year.is_none(), std::cmp::Reverse(a.year), &a.doc_id, ia);
        let kb = (b.year.is_none(), std::cmp::Reverse(b.year), &b.doc_id, ib);
        ka.cmp(&kb)
    });
    hits.into_iter().map(|(_, r)| r).collect()
}

fn short_label(code: &str) -> EntityLabel {
    match code {
        "O" => EntityLabel::Other,
        "P" => EntityLabel::Polymer,
        "PC" => EntityLabel::PolymerClass,
        "M" => EntityLabel::Monomer,
        "OM" => EntityLabel::OrganicMaterial,
        "IM" => EntityLabel::InorganicMaterial,
        "MA" => EntityLabel::MaterialAmount,
        "PN" => EntityLabel::PropertyName,
        "PV" => EntityLabel::PropertyValue,
        other => panic!("unknown label code {other}"),
    }
}

/// Whitespace-token documents with one character offset per token.
fn whitespace_tokens(text: &str) -> Vec<polyrec::TokenSpan> {
    let mut out = Vec::new();
    let mut pos = 0;
    for w in text.split(' ') {
        let n = w.chars().count();
        out.push(polyrec::TokenSpan { surface: w.to_string(), start: pos, end: pos + n, is_continuation: false });
        pos += n + 1;
    }
    out
}

/// (gold, predicted) pairs of the evaluation fixture.
pub fn eval_documents() -> Vec<(polyrec::annotate::AnnotatedDocument, polyrec::annotate::AnnotatedDocument)> {
    use polyrec::annotate::AnnotatedDocument;
    let src = std::fs::read_to_string(fixture("eval/documents.tsv")).unwrap();
    src.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let tokens = whitespace_tokens(f[1]);
            let gold = f[2].split(' ').map(short_label).collect();
            let pred = f[3].split(' ').map(short_label).collect();
            (
                AnnotatedDocument::new(f[0], tokens.clone(), gold).unwrap(),
                AnnotatedDocument::new(f[0], tokens, pred).unwrap(),
            )
        })
        .collect()
}

/// Hand-counted (label or "OVERALL", tp, fp, fn).
pub fn eval_expected() -> Vec<(String, usize, usize, usize)> {
    let src = std::fs::read_to_string(fixture("eval/expected_counts.tsv")).unwrap();
    src.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

#[derive(Deserialize)]
pub struct ValueCase {
    pub surface: String,
    pub numeric: f64,
    pub unit: String,
    pub error: Option<f64>,
    pub range: Option<(f64, f64)>,
}

pub fn value_cases() -> Vec<ValueCase> {
    polyrec::jsonl::read(fixture("values_golden.jsonl")).unwrap()
}

/// Differences between a parse result and its golden case.
pub fn value_mismatch(case: &ValueCase, rel: f64) -> Option<String> {
    let v = match polyrec::extract::parse_property_value(&case.surface) {
        Ok(v) => v,
        Err(e) => return Some(e.to_string()),
    };
    let opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => close(x, y, rel),
        _ => false,
    };
    let ok = close(v.numeric, case.numeric, rel)
        && v.unit_raw == case.unit
        && opt(v.error, case.error)
        && opt(v.range.map(|r| r.0), case.range.map(|r| r.0))
        && opt(v.range.map(|r| r.1), case.range.map(|r| r.1));
    (!ok).then(|| {
        format!("{:?}: got {} {:?} err {:?} range {:?}", case.surface, v.numeric, v.unit_raw, v.error, v.range)
    })
}

#[derive(Deserialize)]
pub struct MarkupCase {
    pub markup: String,
    pub text: String,
}

pub fn markup_cases() -> Vec<MarkupCase> {
    polyrec::jsonl::read(fixture("markup_golden.jsonl")).unwrap()
}
