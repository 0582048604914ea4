//! Pipeline configuration read from TOML.
//!
//! ```toml
//! workers = 4
//!
//! [paths]
//! corpus = "corpus.jsonl"
//! vocab = "vocab.txt"
//! gazetteer = "gazetteer.json"
//! names = "polymer_names.json"
//! units = "units.json"
//! predictions = "predictions.jsonl"
//! records = "out/records.jsonl"
//! diagnostics = "out/diagnostics.jsonl"
//!
//! [extract]
//! window = 10
//! max_levenshtein = 1
//! use_abbreviations = true
//! ```
//!
//! Relative paths resolve against the directory of the config file. Every
//! input path must exist when the config is loaded; `records` and
//! `diagnostics` are outputs of `extract` and inputs of the query commands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use polyrec::extract::{CorefConfig, ExtractConfig, Extractor, NameDictionary, UnitRegistry};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    workers: Option<usize>,
    #[serde(default)]
    paths: PathsSection,
    #[serde(default)]
    extract: ExtractSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathsSection {
    corpus: Option<PathBuf>,
    vocab: Option<PathBuf>,
    gazetteer: Option<PathBuf>,
    names: Option<PathBuf>,
    units: Option<PathBuf>,
    predictions: Option<PathBuf>,
    records: Option<PathBuf>,
    diagnostics: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtractSection {
    window: Option<usize>,
    max_levenshtein: Option<usize>,
    use_abbreviations: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    /// Polymer name normalization dictionary; the shipped one when unset.
    pub names: Option<PathBuf>,
    /// Unit registry; the shipped one when unset.
    pub units: Option<PathBuf>,
    /// External tagger output. When set, `tag` and `extract` replay it
    /// instead of running the dictionary tagger.
    pub predictions: Option<PathBuf>,
    pub records: Option<PathBuf>,
    pub diagnostics: Option<PathBuf>,
    pub extract: ExtractConfig,
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: None,
            vocab: None,
            gazetteer: None,
            names: None,
            units: None,
            predictions: None,
            records: None,
            diagnostics: None,
            extract: ExtractConfig::default(),
            workers: default_workers(),
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&src, base).with_context(|| format!("config {}", path.display()))
    }

    /// Parses config text, resolving relative paths against `base`.
    pub fn parse(src: &str, base: &Path) -> Result<Self> {
        let file: ConfigFile = toml::from_str(src)?;
        let resolve = |p: Option<PathBuf>| p.map(|p| if p.is_absolute() { p } else { base.join(p) });
        let defaults = ExtractConfig::default();
        let config = PipelineConfig {
            corpus: resolve(file.paths.corpus),
            vocab: resolve(file.paths.vocab),
            gazetteer: resolve(file.paths.gazetteer),
            names: resolve(file.paths.names),
            units: resolve(file.paths.units),
            predictions: resolve(file.paths.predictions),
            records: resolve(file.paths.records),
            diagnostics: resolve(file.paths.diagnostics),
            extract: ExtractConfig {
                window: file.extract.window.unwrap_or(defaults.window),
                coref: CorefConfig {
                    max_levenshtein: file.extract.max_levenshtein.unwrap_or(defaults.coref.max_levenshtein),
                    use_abbreviations: file.extract.use_abbreviations.unwrap_or(defaults.coref.use_abbreviations),
                },
            },
            workers: file.workers.unwrap_or_else(default_workers),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        let inputs = [
            ("corpus", &self.corpus),
            ("vocab", &self.vocab),
            ("gazetteer", &self.gazetteer),
            ("names", &self.names),
            ("units", &self.units),
            ("predictions", &self.predictions),
        ];
        for (name, path) in inputs {
            if let Some(p) = path {
                if !p.is_file() {
                    bail!("{name} file {} does not exist", p.display());
                }
            }
        }
        Ok(())
    }

    pub fn registry(&self) -> Result<UnitRegistry> {
        match &self.units {
            Some(p) => UnitRegistry::load(p).with_context(|| format!("unit registry {}", p.display())),
            None => Ok(UnitRegistry::shipped().clone()),
        }
    }

    pub fn names(&self) -> Result<NameDictionary> {
        match &self.names {
            Some(p) => NameDictionary::load(p).with_context(|| format!("name dictionary {}", p.display())),
            None => Ok(NameDictionary::shipped().clone()),
        }
    }

    pub fn extractor(&self) -> Result<Extractor> {
        Ok(Extractor::new(self.registry()?, self.names()?, self.extract))
    }
}
