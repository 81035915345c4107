use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DataError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub seed: u64,
}

/// Shuffles `0..n_rows` with a seeded generator and takes the first
/// `round(train_fraction * n_rows)` indices (half rounds up) as training rows.
pub fn split_train_test(
    n_rows: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<SplitIndices, DataError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DataError::InvalidFraction(train_fraction));
    }
    let n_train = ((train_fraction * n_rows as f64) + 0.5).floor() as usize;
    let n_train = n_train.min(n_rows);
    if n_train == 0 || n_train == n_rows {
        return Err(DataError::DegenerateSplit {
            train: n_train,
            test: n_rows - n_train,
        });
    }
    let mut order: Vec<usize> = (0..n_rows).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test_rows = order.split_off(n_train);
    Ok(SplitIndices {
        train_rows: order,
        test_rows,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn listing_sized_split() {
        let s = split_train_test(1565, 0.8, 7).unwrap();
        assert_eq!(s.train_rows.len(), 1252);
        assert_eq!(s.test_rows.len(), 313);
    }

    #[test]
    fn same_seed_same_split() {
        assert_eq!(
            split_train_test(10, 0.8, 42).unwrap(),
            split_train_test(10, 0.8, 42).unwrap()
        );
        assert_ne!(
            split_train_test(100, 0.8, 1).unwrap(),
            split_train_test(100, 0.8, 2).unwrap()
        );
    }

    #[test]
    fn five_rows() {
        let s = split_train_test(5, 0.8, 3).unwrap();
        assert_eq!(s.train_rows.len(), 4);
        assert_eq!(s.test_rows.len(), 1);
        let mut all: Vec<_> = s.train_rows.iter().chain(&s.test_rows).copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn half_rounds_up() {
        // 0.5 * 5 = 2.5 -> 3
        assert_eq!(split_train_test(5, 0.5, 0).unwrap().train_rows.len(), 3);
    }

    #[test]
    fn degenerate_splits() {
        assert!(matches!(
            split_train_test(1, 0.8, 0),
            Err(DataError::DegenerateSplit { .. })
        ));
        assert!(matches!(
            split_train_test(2, 0.9, 0),
            Err(DataError::DegenerateSplit { train: 2, test: 0 })
        ));
        assert!(matches!(
            split_train_test(10, 1.0, 0),
            Err(DataError::InvalidFraction(_))
        ));
        assert!(matches!(
            split_train_test(10, 0.0, 0),
            Err(DataError::InvalidFraction(_))
        ));
    }

    proptest! {
        #[test]
        fn split_partitions_rows(n in 2usize..=1000, seed in any::<u64>()) {
            match split_train_test(n, 0.8, seed) {
                Ok(s) => {
                    prop_assert_eq!(s.train_rows.len(), ((0.8 * n as f64) + 0.5).floor() as usize);
                    let mut seen = vec![false; n];
                    for &i in s.train_rows.iter().chain(&s.test_rows) {
                        prop_assert!(!seen[i]);
                        seen[i] = true;
                    }
                    prop_assert!(seen.iter().all(|&b| b));
                }
                // only n = 2 rounds to an all-train split
                Err(DataError::DegenerateSplit { .. }) => prop_assert_eq!(n, 2),
                Err(e) => prop_assert!(false, "unexpected {}", e),
            }
        }
    }
}
