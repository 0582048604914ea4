//! Property synonym table and unit registry.
//!
//! Units are compared in a normalized notation: factors with positive
//! exponents, then `/`, then factors with negative exponents, so that
//! `S cm^{-1}`, `S/cm` and `S·cm⁻¹` all become `S/cm`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use serde::Deserialize;
use thiserror::Error;

use crate::record::ParsedValue;
use crate::text::fold_key;

const SHIPPED_UNITS: &str = include_str!("../../data/units.json");

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("cannot read unit registry {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unit registry: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("property {property:?}: conversion for {unit:?} has zero scale")]
    ZeroScale { property: String, unit: String },
    #[error("property {property:?}: canonical unit {unit:?} must convert with (1, 0)")]
    CanonicalNotIdentity { property: String, unit: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("unit {unit:?} is not convertible to {canonical:?} for {property}")]
pub struct UnconvertedUnit {
    pub property: String,
    pub unit: String,
    pub canonical: String,
}

/// `y = scale * x + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub scale: f64,
    pub offset: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine { scale: 1.0, offset: 0.0 };

    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }

    pub fn invert(&self, y: f64) -> f64 {
        (y - self.offset) / self.scale
    }
}

#[derive(Debug, Clone)]
pub struct PropertySpec {
    pub canonical_name: String,
    pub synonyms: Vec<String>,
    pub canonical_unit: String,
    /// Keyed by normalized unit.
    pub conversions: BTreeMap<String, Affine>,
}

impl PropertySpec {
    pub fn conversion(&self, unit_raw: &str) -> Option<Affine> {
        self.conversions.get(&normalize_unit(unit_raw)).copied()
    }
}

#[derive(Deserialize)]
struct RegistryFile {
    properties: Vec<PropertyEntry>,
    #[serde(default)]
    amount_units: BTreeMap<String, Vec<String>>,
}

#[derive(Deserialize)]
struct PropertyEntry {
    name: String,
    #[serde(default)]
    synonyms: Vec<String>,
    unit: String,
    conversions: BTreeMap<String, (f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct UnitRegistry {
    properties: Vec<PropertySpec>,
    by_synonym: HashMap<String, usize>,
    amount_units: HashMap<String, String>,
    known_units: HashSet<String>,
}

static SHIPPED: LazyLock<UnitRegistry> =
    LazyLock::new(|| UnitRegistry::parse(SHIPPED_UNITS).expect("shipped unit registry is valid"));

impl UnitRegistry {
    pub fn shipped() -> &'static UnitRegistry {
        &SHIPPED
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RegistryError> {
        let path = path.as_ref();
        let src = fs::read_to_string(path).map_err(|source| RegistryError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&src)
    }

    pub fn parse(src: &str) -> Result<Self, RegistryError> {
        let file: RegistryFile = serde_json::from_str(src)?;
        let mut properties = Vec::with_capacity(file.properties.len());
        let mut by_synonym = HashMap::new();
        let mut known_units = HashSet::new();
        for entry in file.properties {
            let canonical_unit = normalize_unit(&entry.unit);
            let mut conversions = BTreeMap::new();
            for (unit, (scale, offset)) in entry.conversions {
                if scale == 0.0 {
                    return Err(RegistryError::ZeroScale { property: entry.name, unit });
                }
                conversions.insert(normalize_unit(&unit), Affine { scale, offset });
            }
            match conversions.get(&canonical_unit) {
                None => {
                    conversions.insert(canonical_unit.clone(), Affine::IDENTITY);
                }
                Some(a) if *a != Affine::IDENTITY => {
                    return Err(RegistryError::CanonicalNotIdentity { property: entry.name, unit: entry.unit });
                }
                Some(_) => {}
            }
            known_units.extend(conversions.keys().cloned());
            let idx = properties.len();
            for name in entry.synonyms.iter().chain(std::iter::once(&entry.name)) {
                by_synonym.entry(fold_key(name)).or_insert(idx);
            }
            properties.push(PropertySpec {
                canonical_name: entry.name,
                synonyms: entry.synonyms,
                canonical_unit,
                conversions,
            });
        }
        let mut amount_units = HashMap::new();
        for (canonical, aliases) in file.amount_units {
            let canonical_norm = normalize_unit(&canonical);
            for alias in aliases.iter().chain(std::iter::once(&canonical)) {
                amount_units.insert(normalize_unit(alias), canonical_norm.clone());
            }
        }
        Ok(UnitRegistry { properties, by_synonym, amount_units, known_units })
    }

    pub fn properties(&self) -> &[PropertySpec] {
        &self.properties
    }

    /// Property for a PROPERTY_NAME surface, matched case-insensitively
    /// against names and synonyms.
    pub fn property(&self, name: &str) -> Option<&PropertySpec> {
        self.by_synonym.get(&fold_key(name)).map(|&i| &self.properties[i])
    }

    /// Canonical name for a property surface; unknown names fall back to
    /// their case-folded form.
    pub fn canonical_name(&self, name: &str) -> String {
        self.property(name).map_or_else(|| fold_key(name), |p| p.canonical_name.clone())
    }

    /// Canonical amount unit (`wt%`, `mol%`, ...) for a raw unit.
    pub fn amount_unit(&self, unit_raw: &str) -> Option<&str> {
        self.amount_units.get(&normalize_unit(unit_raw)).map(String::as_str)
    }

    /// True when some property can convert from this unit.
    pub fn is_property_unit(&self, unit_raw: &str) -> bool {
        let n = normalize_unit(unit_raw);
        !n.is_empty() && self.known_units.contains(&n)
    }
}

/// Converts a parsed value to the property's canonical unit.
pub fn convert_units(parsed: &ParsedValue, spec: &PropertySpec) -> Result<ParsedValue, UnconvertedUnit> {
    let affine = spec.conversion(&parsed.unit_raw).ok_or_else(|| UnconvertedUnit {
        property: spec.canonical_name.clone(),
        unit: parsed.unit_raw.clone(),
        canonical: spec.canonical_unit.clone(),
    })?;
    let mut out = parsed.clone();
    out.canonical_numeric = Some(affine.apply(parsed.numeric));
    out.unit_canonical = Some(spec.canonical_unit.clone());
    out.canonical_error = parsed.error.map(|e| e * affine.scale.abs());
    out.canonical_range = parsed.range.map(|(lo, hi)| {
        let (a, b) = (affine.apply(lo), affine.apply(hi));
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    });
    Ok(out)
}

/// Converts an amount to its canonical amount unit; unknown units stay raw.
pub fn convert_amount(parsed: &ParsedValue, registry: &UnitRegistry) -> ParsedValue {
    let mut out = parsed.clone();
    if let Some(unit) = registry.amount_unit(&parsed.unit_raw) {
        out.canonical_numeric = Some(parsed.numeric);
        out.unit_canonical = Some(unit.to_string());
        out.canonical_error = parsed.error;
        out.canonical_range = parsed.range;
    }
    out
}

fn superscript_digit(c: char) -> Option<char> {
    Some(match c {
        '⁰' => '0',
        '¹' => '1',
        '²' => '2',
        '³' => '3',
        '⁴' => '4',
        '⁵' => '5',
        '⁶' => '6',
        '⁷' => '7',
        '⁸' => '8',
        '⁹' => '9',
        '⁻' => '-',
        _ => return None,
    })
}

fn rewrite_superscripts(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        if let Some(d) = superscript_digit(c) {
            out.push_str("^{");
            out.push(d);
            while let Some(d) = chars.peek().and_then(|&c| superscript_digit(c)) {
                out.push(d);
                chars.next();
            }
            out.push('}');
        } else {
            out.push(c);
        }
    }
    out
}

fn split_factor(factor: &str) -> (String, i32) {
    if let Some(caret) = factor.find('^') {
        let base = &factor[..caret];
        let exp = factor[caret + 1..].trim_start_matches('{').trim_end_matches('}').trim();
        if let Ok(e) = exp.trim_start_matches('+').parse::<i32>() {
            return (base.to_string(), e);
        }
        return (factor.to_string(), 1);
    }
    // cm2, cm-2
    let digits_at = factor
        .rfind(|c: char| !(c.is_ascii_digit() || c == '-'))
        .map_or(0, |p| p + factor[p..].chars().next().map_or(0, char::len_utf8));
    let (base, exp) = factor.split_at(digits_at);
    if !base.is_empty()
        && base.chars().all(|c| c.is_alphabetic())
        && matches!(exp.len(), 1 | 2)
        && exp.parse::<i32>().is_ok_and(|e| e != 0)
    {
        return (base.to_string(), exp.parse().unwrap());
    }
    (factor.to_string(), 1)
}

/// Normalized unit notation used for every registry lookup.
pub fn normalize_unit(unit: &str) -> String {
    let s = rewrite_superscripts(unit.trim());
    let s = s.replace("° C", "°C").replace("° F", "°F");
    let mut factors: Vec<(String, i32)> = Vec::new();
    let mut denominator = false;
    let mut current = String::new();
    let flush = |current: &mut String, denominator: &mut bool, factors: &mut Vec<(String, i32)>| {
        if !current.is_empty() {
            let (base, exp) = split_factor(current);
            factors.push((base, if *denominator { -exp } else { exp }));
            current.clear();
            *denominator = false;
        }
    };
    for c in s.chars() {
        match c {
            c if c.is_whitespace() => flush(&mut current, &mut denominator, &mut factors),
            '·' | '⋅' | '*' => flush(&mut current, &mut denominator, &mut factors),
            '/' => {
                flush(&mut current, &mut denominator, &mut factors);
                denominator = true;
            }
            _ => current.push(c),
        }
    }
    flush(&mut current, &mut denominator, &mut factors);

    let render = |(base, exp): &(String, i32)| {
        let e = exp.abs();
        if e == 1 {
            base.clone()
        } else {
            format!("{base}^{{{e}}}")
        }
    };
    let num: Vec<String> = factors.iter().filter(|f| f.1 > 0).map(render).collect();
    let den: Vec<String> = factors.iter().filter(|f| f.1 < 0).map(render).collect();
    match (num.is_empty(), den.is_empty()) {
        (_, true) => num.join("·"),
        (true, false) => format!("1/{}", den.join("·")),
        (false, false) => format!("{}/{}", num.join("·"), den.join("·")),
    }
}
