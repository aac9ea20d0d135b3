use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// Shuffled partition of `0..rows` into sorted (train, test) index lists.
/// The train side holds `round(rows * train_fraction)` rows, kept within
/// `1..rows` so neither side is empty.
pub fn train_test_split(rows: usize, spec: SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if rows < 2 {
        return Err(Error::invalid(format!("cannot split {rows} rows")));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction {} is not in (0, 1)",
            spec.train_fraction
        )));
    }
    let n_train = ((rows as f64 * spec.train_fraction).round() as usize).clamp(1, rows - 1);
    let mut idx: Vec<usize> = (0..rows).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let mut test = idx.split_off(n_train);
    idx.sort_unstable();
    test.sort_unstable();
    Ok((idx, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighty_twenty() {
        let (train, test) = train_test_split(10, SplitSpec::default()).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SplitSpec {
            train_fraction: 0.8,
            seed: 42,
        };
        assert_eq!(train_test_split(100, spec).unwrap(), train_test_split(100, spec).unwrap());
        let other = SplitSpec { seed: 43, ..spec };
        assert_ne!(train_test_split(100, spec).unwrap(), train_test_split(100, other).unwrap());
    }

    #[test]
    fn rejects_tiny_or_bad_input() {
        assert!(train_test_split(1, SplitSpec::default()).is_err());
        let bad = SplitSpec {
            train_fraction: 1.0,
            seed: 0,
        };
        assert!(train_test_split(10, bad).is_err());
        let (train, test) = train_test_split(2, SplitSpec::default()).unwrap();
        assert_eq!((train.len(), test.len()), (1, 1));
    }

    #[test]
    fn test_membership_rate_over_seeds() {
        let mut hits = vec![0u32; 1000];
        for seed in 0..100 {
            let (_, test) = train_test_split(
                1000,
                SplitSpec {
                    train_fraction: 0.8,
                    seed,
                },
            )
            .unwrap();
            for i in test {
                hits[i] += 1;
            }
        }
        // Per-row counts are Binomial(100, 0.2) with sd 4, so a ±5-count
        // band per row is narrower than the noise. Check the mean rate and
        // a 5-sigma per-row envelope instead.
        let mean = hits.iter().map(|&h| h as f64).sum::<f64>() / 1000.0 / 100.0;
        assert!((mean - 0.2).abs() < 1e-12);
        let sigma = (100.0f64 * 0.2 * 0.8).sqrt();
        assert!(hits.iter().all(|&h| (h as f64 - 20.0).abs() <= 5.0 * sigma));
    }
}
