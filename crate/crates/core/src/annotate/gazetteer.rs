use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::EntityLabel;
use crate::text::{fold_key, CharIndex};
use crate::tokenize::TokenSpan;

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("cannot read gazetteer {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("gazetteer {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Case-insensitive surface dictionaries per entity label.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: HashMap<String, EntityLabel>,
    max_chars: usize,
}

impl Gazetteer {
    /// When one surface is listed under several labels, the label that comes
    /// first in ontology order wins.
    pub fn new<I, S>(lists: impl IntoIterator<Item = (EntityLabel, I)>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut sorted: BTreeMap<EntityLabel, Vec<String>> = BTreeMap::new();
        for (label, surfaces) in lists {
            sorted.entry(label).or_default().extend(surfaces.into_iter().map(|s| s.as_ref().to_string()));
        }
        let mut entries = HashMap::new();
        let mut max_chars = 0;
        for (label, surfaces) in sorted {
            if label == EntityLabel::Other {
                continue;
            }
            for s in surfaces {
                let key = fold_key(&s);
                if key.is_empty() {
                    continue;
                }
                max_chars = max_chars.max(key.chars().count());
                entries.entry(key).or_insert(label);
            }
        }
        Gazetteer { entries, max_chars }
    }

    /// Loads `{"POLYMER": ["polystyrene", ...], ...}`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, GazetteerError> {
        let path = path.as_ref();
        let src = fs::read_to_string(path).map_err(|source| GazetteerError::Io { path: path.to_path_buf(), source })?;
        let lists: BTreeMap<EntityLabel, Vec<String>> =
            serde_json::from_str(&src).map_err(|source| GazetteerError::Parse { path: path.to_path_buf(), source })?;
        Ok(Gazetteer::new(lists))
    }

    /// Adds surfaces under `label` unless they are already listed.
    pub fn extend<S: AsRef<str>>(&mut self, label: EntityLabel, surfaces: impl IntoIterator<Item = S>) {
        if label == EntityLabel::Other {
            return;
        }
        for s in surfaces {
            let key = fold_key(s.as_ref());
            if key.is_empty() {
                continue;
            }
            self.max_chars = self.max_chars.max(key.chars().count());
            self.entries.entry(key).or_insert(label);
        }
    }

    pub fn lookup(&self, surface: &str) -> Option<EntityLabel> {
        self.entries.get(&fold_key(surface)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Labels the leftmost-longest, non-overlapping dictionary matches. Matches
/// start and end on word boundaries; everything else is OTHER.
pub fn dictionary_preannotate(text: &str, tokens: &[TokenSpan], gazetteer: &Gazetteer) -> Vec<EntityLabel> {
    let mut labels = vec![EntityLabel::Other; tokens.len()];
    if gazetteer.is_empty() {
        return labels;
    }
    let idx = CharIndex::new(text);
    let ends_word = |j: usize| tokens.get(j + 1).is_none_or(|t| !t.is_continuation);
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i].is_continuation {
            i += 1;
            continue;
        }
        let mut best = None;
        for j in i..tokens.len() {
            if tokens[j].end - tokens[i].start > gazetteer.max_chars + 8 {
                break;
            }
            if !ends_word(j) {
                continue;
            }
            if let Some(label) = gazetteer.lookup(idx.slice(tokens[i].start, tokens[j].end)) {
                best = Some((j, label));
            }
        }
        match best {
            Some((j, label)) => {
                labels[i..=j].fill(label);
                i = j + 1;
            }
            None => i += 1,
        }
    }
    labels
}
