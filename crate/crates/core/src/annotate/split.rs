use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SplitError {
    #[error("ratios must be non-negative and sum to 1, got {0:?}")]
    BadRatios([f64; 3]),
    #[error("{docs} documents cannot fill 3 partitions")]
    TooFewDocuments { docs: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
}

/// Shuffles with a seeded ChaCha generator and partitions into
/// train/validation/test. Validation and test sizes are floor allocations;
/// the remainder goes to train.
pub fn split_dataset<T>(mut docs: Vec<T>, ratios: [f64; 3], seed: u64) -> Result<DatasetSplit<T>, SplitError> {
    if ratios.iter().any(|r| !(0.0..=1.0).contains(r)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(SplitError::BadRatios(ratios));
    }
    let n = docs.len();
    if n < 3 {
        return Err(SplitError::TooFewDocuments { docs: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    docs.shuffle(&mut rng);
    // 1e-9 absorbs representation error such as 10 * 0.1
    let floor = |r: f64| ((n as f64) * r + 1e-9).floor() as usize;
    let n_val = floor(ratios[1]);
    let n_test = floor(ratios[2]);
    let test = docs.split_off(n - n_test);
    let validation = docs.split_off(n - n_test - n_val);
    Ok(DatasetSplit { train: docs, validation, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighty_ten_ten_sizes() {
        let s = split_dataset((0..750).collect(), [0.8, 0.1, 0.1], 7).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (600, 75, 75));
        let s = split_dataset((0..10).collect(), [0.8, 0.1, 0.1], 7).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (8, 1, 1));
    }

    #[test]
    fn deterministic_partition() {
        let a = split_dataset((0..100).collect::<Vec<u32>>(), [0.8, 0.1, 0.1], 42).unwrap();
        let b = split_dataset((0..100).collect::<Vec<u32>>(), [0.8, 0.1, 0.1], 42).unwrap();
        assert_eq!(a, b);
        let c = split_dataset((0..100).collect::<Vec<u32>>(), [0.8, 0.1, 0.1], 43).unwrap();
        assert_ne!(a, c);
        let mut all: Vec<u32> = a.train.iter().chain(&a.validation).chain(&a.test).copied().collect();
        all.sort();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn errors() {
        assert_eq!(split_dataset(vec![1, 2], [0.8, 0.1, 0.1], 0), Err(SplitError::TooFewDocuments { docs: 2 }));
        assert!(matches!(split_dataset(vec![1, 2, 3], [0.5, 0.1, 0.1], 0), Err(SplitError::BadRatios(_))));
    }
}
