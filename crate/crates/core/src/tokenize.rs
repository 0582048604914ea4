//! Wordpiece tokenization against a fixed vocabulary.
//!
//! Text is first split into words (whitespace, then every non-alphanumeric
//! character on its own, keeping `^{...}` and `_{...}` groups whole). Each word
//! is then segmented greedily, longest vocabulary prefix first, with
//! continuation pieces carrying the `##` prefix. A word with any unmatched
//! position becomes a single unknown token.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CONTINUATION_PREFIX: &str = "##";
pub const DEFAULT_UNK: &str = "[UNK]";
/// Words longer than this many characters are emitted as the unknown token.
pub const MAX_WORD_CHARS: usize = 100;

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("cannot read vocabulary {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("vocabulary is empty")]
    Empty,
    #[error("duplicate vocabulary entry {token:?} on line {line}")]
    Duplicate { token: String, line: usize },
    #[error("unknown token {0:?} missing from vocabulary")]
    MissingUnk(String),
}

#[derive(Debug, Clone)]
pub struct Vocabulary {
    entries: Vec<String>,
    index: HashMap<String, u32>,
    unk_token: String,
    max_piece_chars: usize,
}

impl Vocabulary {
    pub fn new(entries: Vec<String>, unk_token: &str) -> Result<Self, VocabError> {
        if entries.is_empty() {
            return Err(VocabError::Empty);
        }
        let mut index = HashMap::with_capacity(entries.len());
        let mut max_piece_chars = 0;
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.clone(), i as u32).is_some() {
                return Err(VocabError::Duplicate { token: e.clone(), line: i + 1 });
            }
            let chars = e.strip_prefix(CONTINUATION_PREFIX).unwrap_or(e).chars().count();
            max_piece_chars = max_piece_chars.max(chars);
        }
        if !index.contains_key(unk_token) {
            return Err(VocabError::MissingUnk(unk_token.to_string()));
        }
        Ok(Vocabulary { entries, index, unk_token: unk_token.to_string(), max_piece_chars })
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn unk_token(&self) -> &str {
        &self.unk_token
    }

    pub fn contains(&self, piece: &str) -> bool {
        self.index.contains_key(piece)
    }

    pub fn id(&self, piece: &str) -> Option<u32> {
        self.index.get(piece).copied()
    }
}

/// Loads a one-token-per-line vocabulary with `[UNK]` as the unknown token.
pub fn load_vocab(path: impl AsRef<Path>) -> Result<Vocabulary, VocabError> {
    load_vocab_with_unk(path, DEFAULT_UNK)
}

pub fn load_vocab_with_unk(path: impl AsRef<Path>, unk: &str) -> Result<Vocabulary, VocabError> {
    let path = path.as_ref();
    let src = fs::read_to_string(path).map_err(|source| VocabError::Io { path: path.to_path_buf(), source })?;
    // blank lines keep their line number but are not entries
    let mut entries = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let tok = line.trim_end_matches('\r');
        if tok.is_empty() {
            continue;
        }
        entries.push(tok.to_string());
        lines.push(i + 1);
    }
    Vocabulary::new(entries, unk).map_err(|e| match e {
        VocabError::Duplicate { token, line } => VocabError::Duplicate { token, line: lines[line - 1] },
        other => other,
    })
}

/// One wordpiece token. `start`/`end` are character offsets into the text the
/// token came from; `surface` is the vocabulary piece (or the unknown token).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "TokenRepr", into = "TokenRepr")]
pub struct TokenSpan {
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub is_continuation: bool,
}

#[derive(Serialize, Deserialize)]
struct TokenRepr {
    surface: String,
    start: usize,
    end: usize,
}

impl From<TokenRepr> for TokenSpan {
    fn from(r: TokenRepr) -> Self {
        let is_continuation = r.surface.starts_with(CONTINUATION_PREFIX) && r.surface.len() > 2;
        TokenSpan { surface: r.surface, start: r.start, end: r.end, is_continuation }
    }
}

impl From<TokenSpan> for TokenRepr {
    fn from(t: TokenSpan) -> Self {
        TokenRepr { surface: t.surface, start: t.start, end: t.end }
    }
}

impl TokenSpan {
    /// The piece text without the continuation prefix.
    pub fn piece(&self) -> &str {
        if self.is_continuation {
            &self.surface[CONTINUATION_PREFIX.len()..]
        } else {
            &self.surface
        }
    }
}

/// A pre-tokenization unit: character offsets of one word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Word {
    pub start: usize,
    pub end: usize,
}

/// Splits text into words on whitespace and punctuation.
pub fn split_words(text: &str) -> Vec<Word> {
    let chars: Vec<char> = text.chars().collect();
    let mut words = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_alphanumeric() {
            let start = i;
            while i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            }
            words.push(Word { start, end: i });
        } else if let Some(end) = group_end(&chars, i) {
            words.push(Word { start: i, end });
            i = end;
        } else {
            words.push(Word { start: i, end: i + 1 });
            i += 1;
        }
    }
    words
}

/// End (exclusive) of a balanced `^{...}` / `_{...}` group starting at `i`.
fn group_end(chars: &[char], i: usize) -> Option<usize> {
    if !matches!(chars[i], '^' | '_') || chars.get(i + 1) != Some(&'{') {
        return None;
    }
    let mut depth = 0usize;
    for (k, &c) in chars.iter().enumerate().skip(i + 1) {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(k + 1);
                }
            }
            c if c.is_whitespace() => return None,
            _ => {}
        }
    }
    None
}

/// Segments one word. Returns pieces as (surface, char start, char end)
/// relative to the word, or `None` when the word is unknown.
pub fn segment_word(word: &str, vocab: &Vocabulary) -> Option<Vec<(String, usize, usize)>> {
    let chars: Vec<char> = word.chars().collect();
    if chars.is_empty() || chars.len() > MAX_WORD_CHARS {
        return None;
    }
    let mut pieces = Vec::new();
    let mut pos = 0;
    let mut candidate = String::new();
    while pos < chars.len() {
        let longest = (chars.len() - pos).min(vocab.max_piece_chars);
        let mut found = None;
        for len in (1..=longest).rev() {
            candidate.clear();
            if pos > 0 {
                candidate.push_str(CONTINUATION_PREFIX);
            }
            candidate.extend(&chars[pos..pos + len]);
            if vocab.contains(&candidate) {
                found = Some(len);
                break;
            }
        }
        let len = found?;
        pieces.push((candidate.clone(), pos, pos + len));
        pos += len;
    }
    Some(pieces)
}

/// Tokenizes a whole text, tracking character offsets.
pub fn wordpiece_tokenize(text: &str, vocab: &Vocabulary) -> Vec<TokenSpan> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut word = String::new();
    for w in split_words(text) {
        word.clear();
        word.extend(&chars[w.start..w.end]);
        match segment_word(&word, vocab) {
            Some(pieces) => out.extend(pieces.into_iter().map(|(surface, s, e)| TokenSpan {
                is_continuation: s > 0,
                surface,
                start: w.start + s,
                end: w.start + e,
            })),
            None => out.push(TokenSpan {
                surface: vocab.unk_token.clone(),
                start: w.start,
                end: w.end,
                is_continuation: false,
            }),
        }
    }
    out
}

/// Word index of every token: continuation pieces share their word's index.
pub fn word_indices(tokens: &[TokenSpan]) -> Vec<usize> {
    let mut idx = Vec::with_capacity(tokens.len());
    let mut current = 0usize;
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 && !t.is_continuation {
            current += 1;
        }
        idx.push(current);
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(entries: &[&str]) -> Vocabulary {
        Vocabulary::new(entries.iter().map(|s| s.to_string()).collect(), DEFAULT_UNK).unwrap()
    }

    fn surfaces(text: &str, v: &Vocabulary) -> Vec<String> {
        wordpiece_tokenize(text, v).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn segments_resultant() {
        let v = vocab(&["[UNK]", "result", "##ant", "res", "##ult"]);
        assert_eq!(surfaces("resultant", &v), ["result", "##ant"]);
    }

    #[test]
    fn greedy_examples() {
        let v = vocab(&["[UNK]", "ab", "a", "##b"]);
        assert_eq!(surfaces("ab", &v), ["ab"]);
        let v = vocab(&["[UNK]", "ab", "a", "##c"]);
        assert_eq!(surfaces("abc", &v), ["ab", "##c"]);
        assert_eq!(surfaces("abd", &v), ["[UNK]"]);
    }

    #[test]
    fn hyphen_is_split_off() {
        let v = vocab(&["[UNK]", "P", "##LL", "##A", "-", "rich"]);
        let toks = wordpiece_tokenize("PLLA-rich", &v);
        let s: Vec<_> = toks.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(s, ["P", "##LL", "##A", "-", "rich"]);
        assert_eq!((toks[1].start, toks[1].end), (1, 3));
        assert!(toks[1].is_continuation && !toks[3].is_continuation);
    }

    #[test]
    fn exponent_groups_stay_whole() {
        let words: Vec<_> = split_words("10^{-6} S cm_{x} ^").iter().map(|w| (w.start, w.end)).collect();
        assert_eq!(words, [(0, 2), (2, 7), (8, 9), (10, 12), (12, 16), (17, 18)]);
    }

    #[test]
    fn offsets_are_char_based() {
        let v = vocab(&["[UNK]", "°", "C", "μ", "##m"]);
        let toks = wordpiece_tokenize("°C μm", &v);
        let spans: Vec<_> = toks.iter().map(|t| (t.start, t.end)).collect();
        assert_eq!(spans, [(0, 1), (1, 2), (3, 4), (4, 5)]);
    }

    #[test]
    fn overlong_word_is_unknown() {
        let v = vocab(&["[UNK]", "a", "##a"]);
        let word = "a".repeat(MAX_WORD_CHARS + 1);
        assert_eq!(surfaces(&word, &v), ["[UNK]"]);
        assert_eq!(surfaces(&"a".repeat(MAX_WORD_CHARS), &v).len(), MAX_WORD_CHARS);
    }

    #[test]
    fn vocab_errors() {
        assert!(matches!(Vocabulary::new(vec![], DEFAULT_UNK), Err(VocabError::Empty)));
        assert!(matches!(Vocabulary::new(vec!["a".into()], DEFAULT_UNK), Err(VocabError::MissingUnk(_))));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("vocab.txt");
        fs::write(&p, "[UNK]\nab\n\nab\n").unwrap();
        match load_vocab(&p) {
            Err(VocabError::Duplicate { token, line }) => assert_eq!((token.as_str(), line), ("ab", 4)),
            other => panic!("{other:?}"),
        }
        fs::write(&p, "").unwrap();
        assert!(matches!(load_vocab(&p), Err(VocabError::Empty)));
        fs::write(&p, "[UNK]\nab\na\nb\n##c\n").unwrap();
        assert_eq!(load_vocab(&p).unwrap().len(), 5);
        assert!(matches!(load_vocab(dir.path().join("missing")), Err(VocabError::Io { .. })));
    }

    #[test]
    fn token_json_shape() {
        let t = TokenSpan { surface: "##ant".into(), start: 6, end: 9, is_continuation: true };
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r###"{"surface":"##ant","start":6,"end":9}"###);
        let back: TokenSpan = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn word_indices_skip_continuations() {
        let v = vocab(&["[UNK]", "P", "##LL", "##A", "-", "rich"]);
        let toks = wordpiece_tokenize("PLLA - rich", &v);
        assert_eq!(word_indices(&toks), [0, 0, 0, 1, 2]);
    }
}
