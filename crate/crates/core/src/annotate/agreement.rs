//! Chance-corrected inter-annotator agreement.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::EntityLabel;

#[derive(Debug, Error, PartialEq)]
pub enum AgreementError {
    #[error("annotation sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no items to compare")]
    Empty,
    #[error("item {item} has {found} ratings, expected {expected}")]
    RowSum { item: usize, found: usize, expected: usize },
    #[error("item {item} has {found} categories, expected {expected}")]
    RaggedRow { item: usize, found: usize, expected: usize },
    #[error("at least two raters are required, got {0}")]
    TooFewRaters(usize),
}

/// Observed and chance agreement for two annotators.
pub fn cohen_components<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<(f64, f64), AgreementError> {
    if a.len() != b.len() {
        return Err(AgreementError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(AgreementError::Empty);
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let mut marg_a: HashMap<&T, usize> = HashMap::new();
    let mut marg_b: HashMap<&T, usize> = HashMap::new();
    for x in a {
        *marg_a.entry(x).or_default() += 1;
    }
    for y in b {
        *marg_b.entry(y).or_default() += 1;
    }
    let p_e = marg_a
        .iter()
        .map(|(k, &ca)| {
            let cb = marg_b.get(k).copied().unwrap_or(0);
            (ca as f64 / n) * (cb as f64 / n)
        })
        .sum();
    Ok((agree / n, p_e))
}

/// Cohen's kappa. Perfect observed agreement returns exactly 1.0.
pub fn cohen_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64, AgreementError> {
    let (p_o, p_e) = cohen_components(a, b)?;
    Ok(kappa(p_o, p_e))
}

fn kappa(p_o: f64, p_e: f64) -> f64 {
    if p_o == 1.0 || p_e >= 1.0 {
        1.0
    } else {
        (p_o - p_e) / (1.0 - p_e)
    }
}

/// Mean per-item agreement and chance agreement for Fleiss' kappa.
///
/// `counts[i][j]` is how many of the `raters` assigned item `i` to category `j`.
pub fn fleiss_components(counts: &[Vec<usize>], raters: usize) -> Result<(f64, f64), AgreementError> {
    if counts.is_empty() {
        return Err(AgreementError::Empty);
    }
    if raters < 2 {
        return Err(AgreementError::TooFewRaters(raters));
    }
    let k = counts[0].len();
    let n = raters as f64;
    let mut totals = vec![0usize; k];
    let mut p_bar = 0.0;
    for (item, row) in counts.iter().enumerate() {
        if row.len() != k {
            return Err(AgreementError::RaggedRow { item, found: row.len(), expected: k });
        }
        let sum: usize = row.iter().sum();
        if sum != raters {
            return Err(AgreementError::RowSum { item, found: sum, expected: raters });
        }
        let squares: usize = row.iter().map(|c| c * c).sum();
        p_bar += (squares - raters) as f64 / (n * (n - 1.0));
        for (t, c) in totals.iter_mut().zip(row) {
            *t += c;
        }
    }
    let items = counts.len() as f64;
    p_bar /= items;
    let p_e = totals.iter().map(|&t| (t as f64 / (items * n)).powi(2)).sum();
    Ok((p_bar, p_e))
}

/// Fleiss' kappa. When every rating falls in one category (chance agreement
/// of 1) the result is 1.0.
pub fn fleiss_kappa(counts: &[Vec<usize>], raters: usize) -> Result<f64, AgreementError> {
    let (p_o, p_e) = fleiss_components(counts, raters)?;
    Ok(kappa(p_o, p_e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseKappa {
    pub a: String,
    pub b: String,
    pub kappa: f64,
}

/// Agreement over token labels of several annotators. `p_o` and `p_e` are the
/// Fleiss components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub cohen_pairwise: Vec<PairwiseKappa>,
    pub fleiss: f64,
    pub p_o: f64,
    pub p_e: f64,
    pub items: usize,
}

/// Token-granularity agreement between named annotators over the same tokens.
pub fn agreement_report(annotators: &[(String, Vec<EntityLabel>)]) -> Result<AgreementReport, AgreementError> {
    if annotators.len() < 2 {
        return Err(AgreementError::TooFewRaters(annotators.len()));
    }
    let len = annotators[0].1.len();
    for (_, labels) in annotators {
        if labels.len() != len {
            return Err(AgreementError::LengthMismatch(len, labels.len()));
        }
    }
    let mut cohen_pairwise = Vec::new();
    for i in 0..annotators.len() {
        for j in i + 1..annotators.len() {
            cohen_pairwise.push(PairwiseKappa {
                a: annotators[i].0.clone(),
                b: annotators[j].0.clone(),
                kappa: cohen_kappa(&annotators[i].1, &annotators[j].1)?,
            });
        }
    }
    let category = |l: EntityLabel| EntityLabel::ALL.iter().position(|&x| x == l).unwrap();
    let counts: Vec<Vec<usize>> = (0..len)
        .map(|t| {
            let mut row = vec![0; EntityLabel::ALL.len()];
            for (_, labels) in annotators {
                row[category(labels[t])] += 1;
            }
            row
        })
        .collect();
    let (p_o, p_e) = fleiss_components(&counts, annotators.len())?;
    Ok(AgreementReport { cohen_pairwise, fleiss: kappa(p_o, p_e), p_o, p_e, items: len })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cohen_examples() {
        assert_eq!(cohen_kappa(&['X', 'Y', 'X'], &['X', 'Y', 'X']).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&['X', 'X', 'Y', 'Y'], &['X', 'Y', 'X', 'Y']).unwrap(), 0.0);
        // p_o = 3/4, p_e = 3/4*2/4 + 1/4*2/4 = 1/2
        let k = cohen_kappa(&['X', 'X', 'X', 'Y'], &['X', 'X', 'Y', 'Y']).unwrap();
        assert!((k - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cohen_errors() {
        assert_eq!(cohen_kappa::<u8>(&[], &[]), Err(AgreementError::Empty));
        assert_eq!(cohen_kappa(&[1], &[1, 2]), Err(AgreementError::LengthMismatch(1, 2)));
    }

    #[test]
    fn fleiss_examples() {
        assert_eq!(fleiss_kappa(&[vec![3, 0], vec![0, 3]], 3).unwrap(), 1.0);
        assert_eq!(fleiss_kappa(&[vec![3, 0], vec![3, 0]], 3).unwrap(), 1.0);
        // P_i = 1, 1, 1/3 -> P = 7/9; p = (5/9, 4/9) -> Pe = 41/81
        let k = fleiss_kappa(&[vec![3, 0], vec![0, 3], vec![2, 1]], 3).unwrap();
        let expected = (7.0 / 9.0 - 41.0 / 81.0) / (1.0 - 41.0 / 81.0);
        assert!((k - expected).abs() < 1e-12);
    }

    #[test]
    fn fleiss_errors() {
        assert_eq!(fleiss_kappa(&[vec![2, 0]], 3), Err(AgreementError::RowSum { item: 0, found: 2, expected: 3 }));
        assert!(matches!(fleiss_kappa(&[vec![2, 0], vec![2]], 2), Err(AgreementError::RaggedRow { .. })));
        assert_eq!(fleiss_kappa(&[vec![1]], 1), Err(AgreementError::TooFewRaters(1)));
    }

    #[test]
    fn report_over_labels() {
        use EntityLabel::*;
        let a = vec![Polymer, Other, PropertyName, PropertyValue];
        let report = agreement_report(&[
            ("a".into(), a.clone()),
            ("b".into(), a.clone()),
            ("c".into(), vec![Polymer, Other, Other, PropertyValue]),
        ])
        .unwrap();
        assert_eq!(report.cohen_pairwise.len(), 3);
        assert_eq!(report.cohen_pairwise[0].kappa, 1.0);
        assert!(report.fleiss < 1.0 && report.fleiss > 0.0);
        assert!((report.fleiss - (report.p_o - report.p_e) / (1.0 - report.p_e)).abs() < 1e-12);
    }
}
