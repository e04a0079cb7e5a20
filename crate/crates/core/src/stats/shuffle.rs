//! Permutation-test sanity checks: compares order-sensitive statistics of a
//! sequence against their distribution over random shuffles of the same
//! values. Complements the ordinal battery with tests aimed at slow drifts
//! and clustering.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::sequence::ThetaSequence;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Order statistics available to [`shuffle_iid_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SequenceStatistic {
    /// Lag-1 sample autocorrelation.
    Lag1Autocorr,
    /// Number of runs in the above/below-median binarization.
    RunsCount,
    /// Longest run in the same binarization.
    LongestRun,
    /// Arithmetic mean: shuffle-invariant, so its p-value is 1 by
    /// construction; useful as a self-check of the machinery.
    Mean,
}

/// The order-sensitive trio; [`SequenceStatistic::Mean`] is deliberately not
/// part of the default set.
pub const DEFAULT_STATISTICS: [SequenceStatistic; 3] = [
    SequenceStatistic::Lag1Autocorr,
    SequenceStatistic::RunsCount,
    SequenceStatistic::LongestRun,
];

/// One statistic's permutation-test outcome.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ShuffleCheck {
    pub statistic: SequenceStatistic,
    pub observed: f64,
    pub p_value: f64,
}

fn evaluate(stat: SequenceStatistic, x: &[f64], median: f64) -> f64 {
    match stat {
        SequenceStatistic::Lag1Autocorr => {
            let n = x.len();
            let mean = x.iter().sum::<f64>() / n as f64;
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..n {
                let d = x[i] - mean;
                den += d * d;
                if i + 1 < n {
                    num += d * (x[i + 1] - mean);
                }
            }
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        }
        SequenceStatistic::RunsCount => {
            let mut runs = 1.0;
            for w in x.windows(2) {
                if (w[0] > median) != (w[1] > median) {
                    runs += 1.0;
                }
            }
            runs
        }
        SequenceStatistic::LongestRun => {
            let mut longest = 1usize;
            let mut current = 1usize;
            for w in x.windows(2) {
                if (w[0] > median) == (w[1] > median) {
                    current += 1;
                    longest = longest.max(current);
                } else {
                    current = 1;
                }
            }
            longest as f64
        }
        SequenceStatistic::Mean => {
            // Summed in sorted order so the value is exactly permutation
            // invariant, not just up to rounding.
            let mut sorted = x.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
            sorted.iter().sum::<f64>() / x.len() as f64
        }
    }
}

/// Two-sided permutation test of each requested statistic against its
/// shuffled-ensemble distribution. The p-value is
/// (1 + #{shuffles at least as extreme}) / (n_shuffles + 1), where extremity
/// is distance from the ensemble mean; it can never be exactly zero.
pub fn shuffle_iid_check<T: Scalar>(
    seq: &ThetaSequence<T>,
    statistics: &[SequenceStatistic],
    n_shuffles: usize,
    seed: u64,
) -> Result<Vec<ShuffleCheck>> {
    if statistics.is_empty() {
        return Err(Error::config("no statistics requested"));
    }
    if n_shuffles < 100 {
        return Err(Error::InsufficientData(
            "permutation test needs at least 100 shuffles".into(),
        ));
    }
    let data = seq.values_f64();
    let median = {
        let mut sorted = data.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
        let mid = sorted.len() / 2;
        if sorted.len() % 2 == 0 {
            0.5 * (sorted[mid - 1] + sorted[mid])
        } else {
            sorted[mid]
        }
    };
    let observed: Vec<f64> = statistics.iter().map(|&s| evaluate(s, &data, median)).collect();

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut work = data.clone();
    let mut ensemble = vec![Vec::with_capacity(n_shuffles); statistics.len()];
    for _ in 0..n_shuffles {
        work.shuffle(&mut rng);
        for (slot, &s) in statistics.iter().enumerate() {
            ensemble[slot].push(evaluate(s, &work, median));
        }
    }

    Ok(statistics
        .iter()
        .zip(observed)
        .zip(&ensemble)
        .map(|((&statistic, obs), values)| {
            let center = values.iter().sum::<f64>() / values.len() as f64;
            let dev = (obs - center).abs();
            let at_least = values.iter().filter(|v| (**v - center).abs() >= dev).count();
            ShuffleCheck {
                statistic,
                observed: obs,
                p_value: (1 + at_least) as f64 / (n_shuffles + 1) as f64,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn uniform_seq(n: usize, seed: u64) -> ThetaSequence<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        ThetaSequence::new((0..n).map(|_| rng.gen_range(0.0..90.0)).collect::<Vec<f64>>()).unwrap()
    }

    #[test]
    fn iid_data_passes_almost_always() {
        let mut all_pass = 0;
        for rep in 0..100 {
            let seq = uniform_seq(200, 2000 + rep);
            let checks = shuffle_iid_check(&seq, &DEFAULT_STATISTICS, 300, 7 + rep).unwrap();
            if checks.iter().all(|c| c.p_value > 0.01) {
                all_pass += 1;
            }
        }
        assert!(all_pass >= 95, "{all_pass} of 100");
    }

    #[test]
    fn sorted_data_fails_every_order_statistic() {
        let seq = ThetaSequence::new((0..300).map(|i| i as f64 * 0.3).collect::<Vec<f64>>()).unwrap();
        let checks = shuffle_iid_check(&seq, &DEFAULT_STATISTICS, 2000, 9).unwrap();
        for c in &checks {
            assert!(c.p_value < 1e-3, "{:?}: {}", c.statistic, c.p_value);
        }
    }

    #[test]
    fn mean_is_shuffle_invariant() {
        let seq = uniform_seq(500, 83);
        let checks = shuffle_iid_check(&seq, &[SequenceStatistic::Mean], 200, 5).unwrap();
        assert_eq!(checks[0].p_value, 1.0);
    }

    #[test]
    fn checks_are_seed_deterministic() {
        let seq = uniform_seq(300, 84);
        let a = shuffle_iid_check(&seq, &DEFAULT_STATISTICS, 150, 31).unwrap();
        let b = shuffle_iid_check(&seq, &DEFAULT_STATISTICS, 150, 31).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn request_validation() {
        let seq = uniform_seq(50, 85);
        assert!(shuffle_iid_check(&seq, &[], 200, 0).is_err());
        assert!(shuffle_iid_check(&seq, &DEFAULT_STATISTICS, 99, 0).is_err());
    }
}
