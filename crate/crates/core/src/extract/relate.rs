//! Locality heuristics: entity filter, property name/value pairing, amount
//! association and material-to-pair relation.
//!
//! Distances are counted in pre-split words between mention edges, so wordpiece
//! continuations never change a distance. Ties go to the preceding mention.

use crate::annotate::EntityLabel;
use crate::record::RelationMode;
use crate::tag::EntityMention;

pub const DEFAULT_WINDOW: usize = 10;

/// A document qualifies when it has a polymer-family mention, a property
/// name and a property value.
pub fn filter_by_entities(mentions: &[EntityMention]) -> bool {
    let has = |pred: &dyn Fn(EntityLabel) -> bool| mentions.iter().any(|m| pred(m.label));
    has(&EntityLabel::is_polymer_family)
        && has(&|l| l == EntityLabel::PropertyName)
        && has(&|l| l == EntityLabel::PropertyValue)
}

/// Nearest candidate to `target` within `window` words. Equal distances
/// prefer a candidate that precedes the target, then the earlier one.
fn nearest<'a>(
    target: &EntityMention,
    candidates: impl Iterator<Item = (usize, &'a EntityMention)>,
    window: usize,
) -> Option<usize> {
    candidates
        .map(|(i, m)| (i, m, target.word_distance(m)))
        .filter(|&(_, _, d)| d <= window)
        .min_by_key(|&(_, m, d)| (d, m.start >= target.start, m.start))
        .map(|(i, _, _)| i)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pairing {
    /// (name index, value index) into the mention slice, in value order.
    pub pairs: Vec<(usize, usize)>,
    /// Values with no name in reach.
    pub unpaired: Vec<usize>,
}

impl Pairing {
    /// Names serving more than one value, with their value count.
    pub fn multi_consumed(&self) -> Vec<(usize, usize)> {
        let mut counts: Vec<(usize, usize)> = Vec::new();
        for &(n, _) in &self.pairs {
            match counts.iter_mut().find(|(name, _)| *name == n) {
                Some(c) => c.1 += 1,
                None => counts.push((n, 1)),
            }
        }
        counts.retain(|&(_, c)| c > 1);
        counts.sort_unstable();
        counts
    }
}

/// Pairs every PROPERTY_VALUE with the nearest PROPERTY_NAME of its sentence
/// within `window` words. A name may serve several values.
pub fn pair_property(mentions: &[EntityMention], window: usize) -> Pairing {
    let mut out = Pairing::default();
    for (vi, v) in mentions.iter().enumerate().filter(|(_, m)| m.label == EntityLabel::PropertyValue) {
        let names = mentions
            .iter()
            .enumerate()
            .filter(|(_, m)| m.label == EntityLabel::PropertyName && m.sentence_index == v.sentence_index);
        match nearest(v, names, window) {
            Some(ni) => out.pairs.push((ni, vi)),
            None => out.unpaired.push(vi),
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AmountLinks {
    /// (amount index, material index) into the mention slice.
    pub links: Vec<(usize, usize)>,
    pub unlinked: Vec<usize>,
}

/// Links every MATERIAL_AMOUNT to the nearest material mention within
/// `window` words.
pub fn associate_amount(mentions: &[EntityMention], window: usize) -> AmountLinks {
    let mut out = AmountLinks::default();
    for (ai, a) in mentions.iter().enumerate().filter(|(_, m)| m.label == EntityLabel::MaterialAmount) {
        let materials = mentions.iter().enumerate().filter(|(_, m)| m.label.is_material());
        match nearest(a, materials, window) {
            Some(mi) => out.links.push((ai, mi)),
            None => out.unlinked.push(ai),
        }
    }
    out
}

/// Materials chosen for one property/value pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub name: usize,
    pub value: usize,
    /// Cluster ids, ascending.
    pub clusters: Vec<usize>,
    pub mode: RelationMode,
}

/// Material mentions must carry `cluster_id`. A value whose sentence has a
/// material takes the closest one's cluster; otherwise every cluster of the
/// abstract is attached.
pub fn relate(mentions: &[EntityMention], pairs: &[(usize, usize)]) -> Vec<Relation> {
    let materials: Vec<(usize, &EntityMention)> =
        mentions.iter().enumerate().filter(|(_, m)| m.label.is_material() && m.cluster_id.is_some()).collect();
    let mut all: Vec<usize> = materials.iter().filter_map(|(_, m)| m.cluster_id).collect();
    all.sort_unstable();
    all.dedup();
    let mut out = Vec::new();
    for &(name, value) in pairs {
        let v = &mentions[value];
        let same = materials.iter().copied().filter(|(_, m)| m.sentence_index == v.sentence_index);
        let relation = match nearest(v, same, usize::MAX) {
            Some(mi) => Relation {
                name,
                value,
                clusters: vec![mentions[mi].cluster_id.unwrap_or_default()],
                mode: RelationMode::SameSentence,
            },
            None if !all.is_empty() => {
                Relation { name, value, clusters: all.clone(), mode: RelationMode::WholeAbstract }
            }
            None => continue,
        };
        out.push(relation);
    }
    out
}
