mod common;

use common::{expected_records, golden_documents, record_mismatches};
use polyrec::extract::{Extraction, Extractor, Stage};
use polyrec::par::Execution;
use polyrec::synth::synthetic_abstracts;
use polyrec::tokenize::DEFAULT_UNK;

fn run(execution: Execution) -> Extraction {
    Extractor::default().extract_corpus(&golden_documents(), execution)
}

#[test]
fn golden_tokens_are_known() {
    for d in golden_documents() {
        for t in &d.tokens {
            assert_ne!(t.surface, DEFAULT_UNK, "{}: {:?}", d.doc.doc_id, d.doc.text);
        }
    }
}

#[test]
fn golden_records_match_hand_worked_table() {
    let got = run(Execution::Serial);
    let want = expected_records();
    let mut errors = Vec::new();
    for (i, w) in want.iter().enumerate() {
        match got.records.get(i) {
            Some(g) => {
                for e in record_mismatches(g, w, 1e-9) {
                    errors.push(format!("row {i} ({}): {e}", w.doc_id));
                }
            }
            None => errors.push(format!("row {i} ({}): missing", w.doc_id)),
        }
    }
    for extra in got.records.iter().skip(want.len()) {
        errors.push(format!("unexpected record {extra:?}"));
    }
    assert!(errors.is_empty(), "{}", errors.join("\n"));
}

#[test]
fn golden_counts() {
    let c = run(Execution::Serial).counts;
    assert_eq!(c.documents, 20);
    assert_eq!(c.polymer_relevant, 19);
    assert_eq!(c.passed_filter, 17);
    assert_eq!(c.records, 24);
    assert_eq!(c.parse_failures, 1);
    assert_eq!(c.unconverted, 1);
    assert_eq!(c.to_string(), "20 in / 17 passed filter / 24 records / 1 parse failures");
}

#[test]
fn golden_diagnostics() {
    let d = run(Execution::Serial).diagnostics;
    let filtered: Vec<&str> = d.iter().filter(|x| x.stage == Stage::Filter).map(|x| x.doc_id.as_str()).collect();
    assert_eq!(filtered, ["g06", "g07", "g08"]);
    assert!(d.iter().any(|x| x.doc_id == "g12" && x.stage == Stage::ParseValue));
    assert!(d.iter().any(|x| x.doc_id == "g13" && x.stage == Stage::PairProperty));
    assert!(d.iter().any(|x| x.doc_id == "g17" && x.stage == Stage::ConvertUnits));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dump = |e: &Extraction| {
        let mut buf = Vec::new();
        polyrec::jsonl::write_to(&mut buf, &e.records).unwrap();
        polyrec::jsonl::write_to(&mut buf, &e.diagnostics).unwrap();
        buf
    };
    let first = dump(&run(Execution::Serial));
    for _ in 0..3 {
        assert_eq!(dump(&run(Execution::Serial)), first);
    }
    assert_eq!(dump(&run(Execution::Parallel(4))), first);
}

#[test]
fn parallel_matches_serial_on_synthetic_corpus() {
    let docs = synthetic_abstracts(500, 11);
    let ex = Extractor::default();
    let serial = ex.extract_corpus(&docs, Execution::Serial);
    for workers in [0, 2, 7] {
        let par = ex.extract_corpus(&docs, Execution::Parallel(workers));
        assert_eq!(par.records, serial.records);
        assert_eq!(par.diagnostics, serial.diagnostics);
        assert_eq!(par.counts, serial.counts);
    }
    assert!(serial.counts.records > 0);
}

/// The golden predictions and records files are consumed by the command-line
/// tests. Set `POLYREC_BLESS=1` to rewrite them after changing the corpus.
#[test]
fn golden_jsonl_fixtures_are_current() {
    use polyrec::annotate::AnnotatedDocument;
    let docs = golden_documents();
    let predictions: Vec<AnnotatedDocument> = docs
        .iter()
        .map(|d| AnnotatedDocument::new(d.doc.doc_id.clone(), d.tokens.clone(), d.labels.clone()).unwrap())
        .collect();
    let records = run(Execution::Serial).records;
    let mut want_predictions = Vec::new();
    polyrec::jsonl::write_to(&mut want_predictions, &predictions).unwrap();
    let mut want_records = Vec::new();
    polyrec::jsonl::write_to(&mut want_records, &records).unwrap();
    let pred_path = common::fixture("golden/predictions.jsonl");
    let rec_path = common::fixture("golden/records.jsonl");
    if std::env::var_os("POLYREC_BLESS").is_some() {
        std::fs::write(&pred_path, &want_predictions).unwrap();
        std::fs::write(&rec_path, &want_records).unwrap();
    }
    assert!(std::fs::read(&pred_path).unwrap() == want_predictions, "{} is stale", pred_path.display());
    assert!(std::fs::read(&rec_path).unwrap() == want_records, "{} is stale", rec_path.display());
}
