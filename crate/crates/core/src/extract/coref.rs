//! Material coreference: abbreviation pairs, edit-distance links, cluster
//! representatives, and dictionary normalisation of polymer names.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tag::EntityMention;
use crate::text::{collapse_whitespace, fold_key};

const SHIPPED_NAMES: &str = include_str!("../../data/polymer_names.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorefConfig {
    pub max_levenshtein: usize,
    pub use_abbreviations: bool,
}

impl Default for CorefConfig {
    fn default() -> Self {
        CorefConfig { max_levenshtein: 1, use_abbreviations: true }
    }
}

/// Character-level edit distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Distance test that skips the full computation when lengths alone exceed
/// the bound.
fn within_distance(a: &str, b: &str, bound: usize) -> bool {
    let (la, lb) = (a.chars().count(), b.chars().count());
    la.abs_diff(lb) <= bound && levenshtein(a, b) <= bound
}

/// A detected (long form, short form) pair, as indices into the mention slice
/// given to [`detect_abbreviations`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AbbreviationPair {
    pub long: usize,
    pub short: usize,
}

/// Finds the start (char index into `long`) of the shortest suffix of `long`
/// that contains every alphanumeric character of `short` in order, the first
/// one at a word start.
pub fn match_long_form(short: &[char], long: &[char]) -> Option<usize> {
    let mut s = short.len();
    let mut l = long.len();
    while s > 0 {
        let c = short[s - 1].to_lowercase().next()?;
        if !c.is_alphanumeric() {
            s -= 1;
            continue;
        }
        loop {
            if l == 0 {
                return None;
            }
            let lc = long[l - 1].to_lowercase().next()?;
            let word_start = l == 1 || !long[l - 2].is_alphanumeric();
            if lc == c && (s > 1 || word_start) {
                break;
            }
            l -= 1;
        }
        l -= 1;
        s -= 1;
    }
    Some(l)
}

fn overlaps(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 < b.1 && b.0 < a.1
}

/// Parenthesised short forms and their long forms within one sentence.
///
/// `sentence_start` is the character offset of `sentence_text` in the
/// document; mention offsets are document offsets. A pair is emitted when a
/// mention covers the short form and a different mention overlaps the matched
/// long form.
pub fn detect_abbreviations(
    sentence_text: &str,
    sentence_start: usize,
    mentions: &[EntityMention],
) -> Vec<AbbreviationPair> {
    let chars: Vec<char> = sentence_text.chars().collect();
    let mut pairs = Vec::new();
    for (p, _) in chars.iter().enumerate().filter(|(_, &c)| c == '(') {
        let Some(q) = chars[p + 1..].iter().position(|&c| c == ')' || c == '(').map(|k| k + p + 1) else {
            continue;
        };
        if chars[q] != ')' {
            continue;
        }
        let inner: String = chars[p + 1..q].iter().collect();
        let short = inner.trim();
        let short_chars: Vec<char> = short.chars().collect();
        if !(2..=10).contains(&short_chars.len())
            || !short_chars.iter().any(|c| c.is_alphabetic())
            || !short_chars[0].is_alphanumeric()
            || short.split_whitespace().count() > 2
        {
            continue;
        }
        let lead = inner.chars().take_while(|c| c.is_whitespace()).count();
        let short_span = (sentence_start + p + 1 + lead, sentence_start + p + 1 + lead + short_chars.len());

        // candidate long form: the last min(|S| + 5, 2|S|) words before '('
        let before: String = chars[..p].iter().collect();
        let before = before.trim_end();
        let max_words = (short_chars.len() + 5).min(2 * short_chars.len());
        let word_starts: Vec<usize> = before
            .char_indices()
            .filter(|&(i, c)| !c.is_whitespace() && (i == 0 || before[..i].ends_with(char::is_whitespace)))
            .map(|(i, _)| before[..i].chars().count())
            .collect();
        let Some(&cand_start) = word_starts.get(word_starts.len().saturating_sub(max_words)) else {
            continue;
        };
        let before_chars: Vec<char> = before.chars().collect();
        let candidate = &before_chars[cand_start..];
        let Some(rel) = match_long_form(&short_chars, candidate) else {
            continue;
        };
        let long_span = (sentence_start + cand_start + rel, sentence_start + before_chars.len());

        let Some(short_idx) = mentions.iter().position(|m| overlaps((m.start, m.end), short_span)) else {
            continue;
        };
        let long_idx = mentions
            .iter()
            .enumerate()
            .filter(|(i, m)| *i != short_idx && overlaps((m.start, m.end), long_span))
            .max_by_key(|(_, m)| m.end.min(long_span.1).saturating_sub(m.start.max(long_span.0)))
            .map(|(i, _)| i);
        if let Some(long) = long_idx {
            pairs.push(AbbreviationPair { long, short: short_idx });
        }
    }
    pairs
}

/// Connected components over edit-distance and abbreviation links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    /// Cluster id of each input mention, in input order.
    pub cluster_of: Vec<usize>,
    /// Representative surface of each cluster.
    pub representatives: Vec<String>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// Clusters material mentions of one document. Cluster ids are numbered by
/// the earliest member's position, so they do not depend on input order.
pub fn coreference(mentions: &[EntityMention], pairs: &[AbbreviationPair], config: &CorefConfig) -> Clustering {
    let n = mentions.len();
    let surfaces: Vec<String> = mentions.iter().map(|m| collapse_whitespace(&m.surface)).collect();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if within_distance(&surfaces[i], &surfaces[j], config.max_levenshtein) {
                union(&mut parent, i, j);
            }
        }
    }
    if config.use_abbreviations {
        for p in pairs {
            if p.long < n && p.short < n {
                union(&mut parent, p.long, p.short);
            }
        }
    }

    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        members.entry(root).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = members.into_values().collect();
    let position = |i: &usize| (mentions[*i].start, mentions[*i].end, &surfaces[*i]);
    groups.sort_by(|a, b| {
        let pa = a.iter().map(position).min();
        let pb = b.iter().map(position).min();
        pa.cmp(&pb)
    });

    let mut cluster_of = vec![0; n];
    let mut representatives = Vec::with_capacity(groups.len());
    for (id, group) in groups.iter().enumerate() {
        let mut freq: HashMap<&str, usize> = HashMap::new();
        for &i in group {
            cluster_of[i] = id;
            *freq.entry(surfaces[i].as_str()).or_default() += 1;
        }
        let rep = freq
            .into_iter()
            .max_by(|(sa, ca), (sb, cb)| ca.cmp(cb).then(sa.chars().count().cmp(&sb.chars().count())).then(sb.cmp(sa)))
            .map(|(s, _)| s.to_string())
            .unwrap_or_default();
        representatives.push(rep);
    }
    Clustering { cluster_of, representatives }
}

#[derive(Debug, Error)]
pub enum NameDictionaryError {
    #[error("cannot read name dictionary {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("name dictionary: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Polymer name variants (case-folded) mapped to their canonical name.
#[derive(Debug, Clone, Default)]
pub struct NameDictionary {
    variants: HashMap<String, String>,
}

static SHIPPED_DICTIONARY: LazyLock<NameDictionary> =
    LazyLock::new(|| NameDictionary::parse(SHIPPED_NAMES).expect("shipped name dictionary is valid"));

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedName {
    pub name: String,
    /// False when the dictionary had no entry and `name` is the input.
    pub normalized: bool,
}

impl NameDictionary {
    pub fn shipped() -> &'static NameDictionary {
        &SHIPPED_DICTIONARY
    }

    /// Parses `{"canonical": ["variant", ...], ...}`.
    pub fn parse(src: &str) -> Result<Self, NameDictionaryError> {
        let clusters: BTreeMap<String, Vec<String>> = serde_json::from_str(src)?;
        Ok(Self::from_clusters(clusters))
    }

    pub fn from_clusters<I, V, S>(clusters: I) -> Self
    where
        I: IntoIterator<Item = (S, V)>,
        V: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut variants = HashMap::new();
        for (canonical, names) in clusters {
            let canonical = canonical.as_ref().to_string();
            variants.insert(fold_key(&canonical), canonical.clone());
            for v in names {
                variants.entry(fold_key(v.as_ref())).or_insert_with(|| canonical.clone());
            }
        }
        NameDictionary { variants }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NameDictionaryError> {
        let path = path.as_ref();
        let src =
            fs::read_to_string(path).map_err(|source| NameDictionaryError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&src)
    }

    pub fn get(&self, surface: &str) -> Option<&str> {
        self.variants.get(&fold_key(surface)).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }
}

pub fn normalize_name(surface: &str, dictionary: &NameDictionary) -> NormalizedName {
    match dictionary.get(surface) {
        Some(name) => NormalizedName { name: name.to_string(), normalized: true },
        None => NormalizedName { name: surface.to_string(), normalized: false },
    }
}
