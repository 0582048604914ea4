//! Pipeline stages as the command line runs them.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use polyrec::annotate::{
    agreement_report, evaluate_corpus, AgreementReport, AnnotatedDocument, EvaluationReport, Gazetteer,
};
use polyrec::corpus::{validate_corpus, Preprocessor};
use polyrec::extract::{Extraction, TaggedDocument};
use polyrec::par::{self, Execution};
use polyrec::tag::{attach_predictions, load_predictions, GazetteerTagger, PredictionsTagger, Tagger};
use polyrec::tokenize::{load_vocab, wordpiece_tokenize};
use polyrec::{jsonl, Document, RawDocument};

use crate::config::PipelineConfig;

fn required<'a>(path: &'a Option<PathBuf>, name: &str) -> Result<&'a Path> {
    path.as_deref().with_context(|| format!("no {name} path configured"))
}

pub fn execution(config: &PipelineConfig) -> Execution {
    Execution::from_workers(config.workers)
}

/// Reads, validates and preprocesses the configured corpus.
pub fn preprocess(config: &PipelineConfig) -> Result<Vec<Document>> {
    let path = required(&config.corpus, "corpus")?;
    let raw: Vec<RawDocument> = jsonl::read(path)?;
    validate_corpus(&raw).with_context(|| format!("corpus {}", path.display()))?;
    let pre = Preprocessor::shipped();
    Ok(par::map(execution(config), &raw, |r| pre.preprocess(r)))
}

/// Preprocesses, tokenizes and labels the corpus, replaying predictions when
/// configured and running the dictionary tagger otherwise.
pub fn tag(config: &PipelineConfig) -> Result<Vec<TaggedDocument>> {
    let docs = preprocess(config)?;
    let vocab_path = required(&config.vocab, "vocab")?;
    let vocab = load_vocab(vocab_path).with_context(|| format!("vocabulary {}", vocab_path.display()))?;
    let exec = execution(config);
    let tokens = par::map(exec, &docs, |d| wordpiece_tokenize(&d.text, &vocab));

    let tagger: Box<dyn Tagger> = match &config.predictions {
        Some(p) => {
            let predictions = load_predictions(p)?;
            let corpus = docs.iter().zip(&tokens).map(|(d, t)| (d.doc_id.as_str(), t.as_slice()));
            let labels =
                attach_predictions(corpus, predictions).with_context(|| format!("predictions {}", p.display()))?;
            Box::new(PredictionsTagger::new(labels))
        }
        None => {
            let gazetteer = match &config.gazetteer {
                Some(p) => Gazetteer::load(p)?,
                None => Gazetteer::default(),
            };
            Box::new(GazetteerTagger::new(gazetteer, config.registry()?))
        }
    };
    let pairs: Vec<(Document, Vec<_>)> = docs.into_iter().zip(tokens).collect();
    Ok(par::map(exec, &pairs, |(doc, tokens)| TaggedDocument {
        labels: tagger.tag(doc, tokens),
        doc: doc.clone(),
        tokens: tokens.clone(),
    }))
}

pub fn annotated(tagged: &[TaggedDocument]) -> Vec<AnnotatedDocument> {
    tagged
        .iter()
        .map(|t| AnnotatedDocument { doc_id: t.doc.doc_id.clone(), tokens: t.tokens.clone(), labels: t.labels.clone() })
        .collect()
}

pub fn extract(config: &PipelineConfig) -> Result<Extraction> {
    let tagged = tag(config)?;
    Ok(config.extractor()?.extract_corpus(&tagged, execution(config)))
}

/// Sidecar path for diagnostics: the configured one, or
/// `<records stem>.diagnostics.jsonl` next to the records file.
pub fn diagnostics_path(config: &PipelineConfig, records: &Path) -> PathBuf {
    config.diagnostics.clone().unwrap_or_else(|| {
        let stem = records.file_stem().and_then(|s| s.to_str()).unwrap_or("records");
        records.with_file_name(format!("{stem}.diagnostics.jsonl"))
    })
}

fn read_annotated(path: &Path) -> Result<Vec<AnnotatedDocument>> {
    let docs: Vec<AnnotatedDocument> = jsonl::read(path)?;
    for d in &docs {
        d.check().with_context(|| format!("{}", path.display()))?;
    }
    Ok(docs)
}

/// Strict entity-level scores of predictions against gold, paired by doc id.
pub fn evaluate(pred: &Path, gold: &Path) -> Result<EvaluationReport> {
    let pred_docs = read_annotated(pred)?;
    let gold_docs = read_annotated(gold)?;
    let mut by_id: HashMap<&str, &AnnotatedDocument> = HashMap::new();
    for p in &pred_docs {
        if by_id.insert(&p.doc_id, p).is_some() {
            bail!("{}: duplicate document {:?}", pred.display(), p.doc_id);
        }
    }
    let mut pairs = Vec::with_capacity(gold_docs.len());
    for g in &gold_docs {
        let Some(p) = by_id.remove(g.doc_id.as_str()) else {
            bail!("{}: no prediction for gold document {:?}", pred.display(), g.doc_id);
        };
        pairs.push((p, g));
    }
    if let Some(extra) = by_id.keys().min() {
        bail!("{}: prediction for unknown document {extra:?}", pred.display());
    }
    Ok(evaluate_corpus(pairs)?)
}

/// Token-level agreement between annotator files over the documents of the
/// first file. Annotators are named by file stem.
pub fn kappa(paths: &[PathBuf]) -> Result<AgreementReport> {
    if paths.len() < 2 {
        bail!("kappa needs at least two annotation files");
    }
    let files: Vec<Vec<AnnotatedDocument>> = paths.iter().map(|p| read_annotated(p)).collect::<Result<_>>()?;
    let indexed: Vec<BTreeMap<&str, &AnnotatedDocument>> =
        files.iter().map(|f| f.iter().map(|d| (d.doc_id.as_str(), d)).collect()).collect();
    let mut annotators: Vec<(String, Vec<_>)> = paths
        .iter()
        .map(|p| {
            (p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()), Vec::new())
        })
        .collect();
    for reference in &files[0] {
        for (i, index) in indexed.iter().enumerate() {
            let Some(doc) = index.get(reference.doc_id.as_str()) else {
                bail!("{}: missing document {:?}", paths[i].display(), reference.doc_id);
            };
            let same_tokens = doc.tokens.len() == reference.tokens.len()
                && doc.tokens.iter().zip(&reference.tokens).all(|(a, b)| (a.start, a.end) == (b.start, b.end));
            if !same_tokens {
                bail!("{}: document {:?} is tokenized differently", paths[i].display(), reference.doc_id);
            }
            annotators[i].1.extend_from_slice(&doc.labels);
        }
    }
    Ok(agreement_report(&annotators)?)
}
