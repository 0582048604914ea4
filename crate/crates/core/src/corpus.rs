//! Document ingestion: markup stripping, character normalisation, sentence
//! splitting and the cheap relevance filters applied before tagging.

use std::collections::{HashMap, HashSet};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_UNICODE_MAP: &str = include_str!("../data/unicode_map.tsv");
const DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("document with empty doc_id")]
    EmptyId,
    #[error("duplicate doc_id {0:?}")]
    DuplicateId(String),
    #[error("document {doc_id:?}: year {year} outside [1800, 2100]")]
    YearOutOfRange { doc_id: String, year: i32 },
    #[error("unicode map line {line}: {reason}")]
    BadMapLine { line: usize, reason: String },
}

/// One abstract as delivered by the corpus, markup included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_markup: String,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub doi: Option<String>,
}

impl RawDocument {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.doc_id.trim().is_empty() {
            return Err(CorpusError::EmptyId);
        }
        if let Some(year) = self.year {
            if !(1800..=2100).contains(&year) {
                return Err(CorpusError::YearOutOfRange { doc_id: self.doc_id.clone(), year });
            }
        }
        Ok(())
    }
}

/// Checks per-document invariants and doc_id uniqueness across a corpus.
pub fn validate_corpus(docs: &[RawDocument]) -> Result<(), CorpusError> {
    let mut seen = HashSet::with_capacity(docs.len());
    for doc in docs {
        doc.validate()?;
        if !seen.insert(doc.doc_id.as_str()) {
            return Err(CorpusError::DuplicateId(doc.doc_id.clone()));
        }
    }
    Ok(())
}

/// A preprocessed abstract. Sentence spans are character offsets into `text`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    pub text: String,
    pub sentences: Vec<(usize, usize)>,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub doi: Option<String>,
}

impl Document {
    /// Index of the sentence containing character offset `pos`, or the nearest
    /// preceding one when `pos` falls in inter-sentence whitespace.
    pub fn sentence_of(&self, pos: usize) -> usize {
        match self.sentences.binary_search_by(|&(s, _)| s.cmp(&pos)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    pub fn is_polymer_relevant(&self) -> bool {
        is_polymer_relevant(&self.text)
    }

    pub fn has_numeric_info(&self) -> bool {
        has_numeric_info(&self.text)
    }
}

/// Replacement table for characters with several visually similar encodings.
#[derive(Debug, Clone, Default)]
pub struct UnicodeMap {
    map: HashMap<char, String>,
}

impl UnicodeMap {
    /// Parses the tab-separated table format of `data/unicode_map.tsv`.
    pub fn parse(src: &str) -> Result<Self, CorpusError> {
        let mut map = HashMap::new();
        for (i, line) in src.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| CorpusError::BadMapLine { line: i + 1, reason: reason.into() };
            let mut cols = line.split('\t');
            let from = cols.next().ok_or_else(|| bad("missing source"))?;
            let to = cols.next().unwrap_or("");
            let from = u32::from_str_radix(from.trim(), 16)
                .ok()
                .and_then(char::from_u32)
                .ok_or_else(|| bad("bad source code point"))?;
            let mut replacement = String::new();
            for cp in to.split_whitespace() {
                let c = u32::from_str_radix(cp, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| bad("bad replacement code point"))?;
                replacement.push(c);
            }
            map.insert(from, replacement);
        }
        Ok(UnicodeMap { map })
    }

    pub fn apply(&self, s: &str) -> String {
        let mut out = String::with_capacity(s.len());
        for c in s.chars() {
            match self.map.get(&c) {
                Some(r) => out.push_str(r),
                None => out.push(c),
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Markup stripping and sentence splitting configuration.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub unicode: UnicodeMap,
    pub abbreviations: HashSet<String>,
}

static DEFAULT_PREPROCESSOR: LazyLock<Preprocessor> = LazyLock::new(|| Preprocessor {
    unicode: UnicodeMap::parse(DEFAULT_UNICODE_MAP).expect("shipped unicode map parses"),
    abbreviations: parse_abbreviations(DEFAULT_ABBREVIATIONS),
});

pub fn parse_abbreviations(src: &str) -> HashSet<String> {
    src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect()
}

impl Default for Preprocessor {
    fn default() -> Self {
        DEFAULT_PREPROCESSOR.clone()
    }
}

impl Preprocessor {
    /// Shared instance built from the shipped data files.
    pub fn shipped() -> &'static Preprocessor {
        &DEFAULT_PREPROCESSOR
    }

    pub fn strip_markup(&self, markup: &str) -> String {
        let parsed = parse_markup(markup);
        let mapped = self.unicode.apply(&parsed);
        let guarded = guard_reparse(&mapped);
        crate::text::collapse_whitespace(&guarded)
    }

    pub fn split_sentences(&self, text: &str) -> Vec<(usize, usize)> {
        split_sentences_with(text, &self.abbreviations)
    }

    pub fn preprocess(&self, raw: &RawDocument) -> Document {
        let text = self.strip_markup(&raw.abstract_markup);
        let sentences = self.split_sentences(&text);
        Document {
            doc_id: raw.doc_id.clone(),
            title: self.strip_markup(&raw.title),
            text,
            sentences,
            year: raw.year,
            doi: raw.doi.clone(),
        }
    }
}

/// Strips markup with the shipped Unicode table.
pub fn strip_markup(markup: &str) -> String {
    Preprocessor::shipped().strip_markup(markup)
}

/// Splits with the shipped abbreviation list.
pub fn split_sentences(text: &str) -> Vec<(usize, usize)> {
    Preprocessor::shipped().split_sentences(text)
}

pub fn preprocess(raw: &RawDocument) -> Document {
    Preprocessor::shipped().preprocess(raw)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Group {
    Sup,
    Sub,
}

enum TagKind {
    Open(Group),
    Close(Group),
    Block,
    Inline,
}

fn classify_tag(content: &str) -> TagKind {
    let (closing, rest) = match content.strip_prefix('/') {
        Some(r) => (true, r),
        None => (false, content),
    };
    let name: String = rest
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric() || matches!(c, ':' | '-' | '_' | '.'))
        .collect::<String>()
        .to_ascii_lowercase();
    // jats:sup, mml:msub and friends
    let local = name.rsplit(':').next().unwrap_or("");
    let group = match local {
        "sup" => Some(Group::Sup),
        "sub" | "inf" => Some(Group::Sub),
        _ => None,
    };
    if let Some(g) = group {
        // <sup/> opens and closes nothing
        if rest.trim_end().ends_with('/') {
            return TagKind::Inline;
        }
        return if closing { TagKind::Close(g) } else { TagKind::Open(g) };
    }
    match local {
        "p" | "br" | "div" | "li" | "ul" | "ol" | "h1" | "h2" | "h3" | "h4" | "h5" | "h6" | "tr" | "td" | "th"
        | "table" | "section" | "sec" | "title" | "para" | "abstract" | "hr" | "simple-para" | "list-item" => {
            TagKind::Block
        }
        _ => TagKind::Inline,
    }
}

fn is_tag_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '/' || c == '!'
}

fn decode_entity(name: &str) -> Option<char> {
    if let Some(num) = name.strip_prefix('#') {
        let code = match num.strip_prefix(['x', 'X']) {
            Some(hex) => u32::from_str_radix(hex, 16).ok()?,
            None => num.parse().ok()?,
        };
        return char::from_u32(code).filter(|c| *c != '\0');
    }
    Some(match name {
        "nbsp" => '\u{00A0}',
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "deg" => '°',
        "plusmn" => '±',
        "times" => '×',
        "minus" => '\u{2212}',
        "micro" => 'µ',
        "mu" => 'μ',
        "ndash" => '\u{2013}',
        "mdash" => '\u{2014}',
        "thinsp" => '\u{2009}',
        "ensp" => '\u{2002}',
        "emsp" => '\u{2003}',
        "le" => '≤',
        "ge" => '≥',
        "sim" => '~',
        "asymp" => '≈',
        "middot" => '·',
        "sup2" => '²',
        "sup3" => '³',
        _ => return None,
    })
}

/// Length in chars of a decodable entity starting at `chars[i] == '&'`.
fn entity_at(chars: &[char], i: usize) -> Option<(usize, char)> {
    let end = chars.iter().skip(i + 1).take(12).position(|&c| c == ';')? + i + 1;
    let name: String = chars[i + 1..end].iter().collect();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '#') {
        return None;
    }
    decode_entity(&name).map(|c| (end - i + 1, c))
}

fn parse_markup(markup: &str) -> String {
    let chars: Vec<char> = markup.chars().collect();
    let mut out = String::with_capacity(markup.len());
    let mut open: Vec<Group> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '<' && chars.get(i + 1).is_some_and(|&n| is_tag_start(n)) {
            let close = chars[i + 1..].iter().position(|&c| c == '>' || c == '<');
            match close.map(|p| p + i + 1) {
                Some(j) if chars[j] == '>' => {
                    let content: String = chars[i + 1..j].iter().collect();
                    if !content.starts_with('!') {
                        match classify_tag(&content) {
                            TagKind::Open(Group::Sup) => {
                                out.push_str("^{");
                                open.push(Group::Sup);
                            }
                            TagKind::Open(Group::Sub) => {
                                out.push_str("_{");
                                open.push(Group::Sub);
                            }
                            TagKind::Close(g) => {
                                if let Some(pos) = open.iter().rposition(|&o| o == g) {
                                    for _ in pos..open.len() {
                                        out.push('}');
                                    }
                                    open.truncate(pos);
                                }
                            }
                            TagKind::Block => out.push(' '),
                            TagKind::Inline => {}
                        }
                    }
                    i = j + 1;
                }
                _ => {
                    // unterminated tag: keep its text, drop the bracket
                    i += 1;
                }
            }
            continue;
        }
        if c == '&' {
            if let Some((len, decoded)) = entity_at(&chars, i) {
                out.push(decoded);
                i += len;
                continue;
            }
        }
        out.push(c);
        i += 1;
    }
    for _ in &open {
        out.push('}');
    }
    out
}

/// Separates characters produced by entity decoding that a second pass would
/// read as markup, so stripping is idempotent.
fn guard_reparse(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    for (i, &c) in chars.iter().enumerate() {
        out.push(c);
        let needs_gap = match c {
            '<' => chars.get(i + 1).is_some_and(|&n| is_tag_start(n)),
            '&' => entity_at(&chars, i).is_some(),
            _ => false,
        };
        if needs_gap {
            out.push(' ');
        }
    }
    out
}

fn split_sentences_with(text: &str, abbreviations: &HashSet<String>) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut spans = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if matches!(chars[i], '.' | '?' | '!') {
            let mut end = i + 1;
            while end < chars.len() && matches!(chars[end], ')' | ']' | '"' | '\'') {
                end += 1;
            }
            let ws_end = {
                let mut k = end;
                while k < chars.len() && chars[k].is_whitespace() {
                    k += 1;
                }
                k
            };
            let next_ok = ws_end > end && chars.get(ws_end).is_some_and(|c| c.is_uppercase() || c.is_ascii_digit());
            if next_ok && !(chars[i] == '.' && is_protected_period(&chars, i, abbreviations)) {
                push_trimmed(&chars, start, end, &mut spans);
                start = ws_end;
                i = ws_end;
                continue;
            }
        }
        i += 1;
    }
    push_trimmed(&chars, start, chars.len(), &mut spans);
    spans
}

fn is_protected_period(chars: &[char], i: usize, abbreviations: &HashSet<String>) -> bool {
    if i > 0 && chars[i - 1].is_ascii_digit() && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()) {
        return true;
    }
    let word_start = chars[..i].iter().rposition(|c| c.is_whitespace()).map_or(0, |p| p + 1);
    let word: String = chars[word_start..=i].iter().skip_while(|c| matches!(c, '(' | '[' | '"' | '\'')).collect();
    abbreviations.contains(&word)
}

fn push_trimmed(chars: &[char], mut start: usize, mut end: usize, spans: &mut Vec<(usize, usize)>) {
    while start < end && chars[start].is_whitespace() {
        start += 1;
    }
    while end > start && chars[end - 1].is_whitespace() {
        end -= 1;
    }
    if start < end {
        spans.push((start, end));
    }
}

/// Case-insensitive substring test for "poly".
pub fn is_polymer_relevant(text: &str) -> bool {
    text.to_lowercase().contains("poly")
}

static NUMBER_TOKEN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^[(\[~≈<>≤≥]*[-+]?(?:\d+(?:\.\d+)?|\.\d+)(?:[eE][-+]?\d+)?(?:\^\{[-+]?\d+\})?").unwrap()
});

const NON_UNIT_WORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "been", "between", "by", "for", "from", "in", "into", "is", "it", "of",
    "on", "or", "than", "that", "the", "these", "this", "those", "to", "was", "were", "which", "with", "after",
    "before", "during", "while", "where", "when",
];

fn is_unit_token(token: &str) -> bool {
    let t = token.trim_start_matches(['(', '[']).trim_end_matches([',', ';', '.', ')', ']', ':']);
    let Some(first) = t.chars().next() else {
        return false;
    };
    let starts_like_unit = first.is_alphabetic() || matches!(first, '%' | '°');
    let bears_letter = t.chars().any(char::is_alphabetic) || t.contains('%');
    starts_like_unit && bears_letter && t.chars().count() <= 12 && !NON_UNIT_WORDS.contains(&t.to_lowercase().as_str())
}

/// True when a number is followed, within two whitespace tokens, by a
/// unit-like token (or carries one attached, as in `105°C`).
pub fn has_numeric_info(text: &str) -> bool {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    for (i, tok) in tokens.iter().enumerate() {
        let Some(m) = NUMBER_TOKEN.find(tok) else {
            continue;
        };
        let rest = &tok[m.end()..];
        if !rest.is_empty() && is_unit_token(rest) {
            return true;
        }
        if tokens[i + 1..].iter().take(2).any(|t| is_unit_token(t)) {
            return true;
        }
    }
    false
}
