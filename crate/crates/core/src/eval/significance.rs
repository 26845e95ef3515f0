use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Up to this many queries the sign-flip distribution is enumerated exactly.
pub const EXACT_MAX_QUERIES: usize = 20;

const SHARD: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigTestResult {
    pub p_value: f64,
    /// mean(a - b) over queries.
    pub observed_mean_diff: f64,
    /// Permutations examined; 2^n when enumerated.
    pub samples: u64,
    pub seed: u64,
    pub exact: bool,
}

impl SigTestResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

fn paired_diffs(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
    if a.len() != b.len() || a.keys().any(|q| !b.contains_key(q)) {
        let only_a: Vec<&str> = a.keys().filter(|q| !b.contains_key(*q)).map(String::as_str).collect();
        let only_b: Vec<&str> = b.keys().filter(|q| !a.contains_key(*q)).map(String::as_str).collect();
        return Err(Error::QueryMismatch(format!(
            "only in first: {only_a:?}; only in second: {only_b:?}"
        )));
    }
    Ok(a.iter().map(|(q, va)| va - b[q]).collect())
}

/// Permuted sums at least this close to the observed magnitude count as ties.
fn threshold(diffs: &[f64]) -> f64 {
    let observed: f64 = diffs.iter().sum::<f64>().abs();
    let scale: f64 = diffs.iter().map(|d| d.abs()).sum();
    observed - 1e-9 * scale.max(f64::MIN_POSITIVE)
}

/// Paired two-sided sign-flip test on per-query differences. Enumerates all 2^n sign patterns
/// when n is small enough, otherwise samples `samples` patterns from a seeded generator.
pub fn fisher_randomization(
    a: &BTreeMap<String, f64>,
    b: &BTreeMap<String, f64>,
    samples: u64,
    seed: u64,
) -> Result<SigTestResult> {
    let diffs = paired_diffs(a, b)?;
    if diffs.len() <= EXACT_MAX_QUERIES {
        Ok(randomization_exact(&diffs))
    } else {
        randomization_monte_carlo(&diffs, samples, seed)
    }
}

fn mean_of(diffs: &[f64]) -> f64 {
    if diffs.is_empty() {
        0.0
    } else {
        diffs.iter().sum::<f64>() / diffs.len() as f64
    }
}

/// p = fraction of all 2^n sign patterns whose |sum| reaches the observed |sum|.
pub fn randomization_exact(diffs: &[f64]) -> SigTestResult {
    assert!(diffs.len() <= 30, "exact enumeration of {} queries", diffs.len());
    let n = diffs.len();
    let total: u64 = 1 << n;
    let limit = threshold(diffs);
    let chunk = total.min(1 << 14);
    let count: u64 = (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            (c * chunk..(c + 1) * chunk)
                .filter(|&mask| {
                    let s: f64 = diffs
                        .iter()
                        .enumerate()
                        .map(|(i, &d)| if mask >> i & 1 == 1 { -d } else { d })
                        .sum();
                    s.abs() >= limit
                })
                .count() as u64
        })
        .sum();
    SigTestResult {
        p_value: count as f64 / total as f64,
        observed_mean_diff: mean_of(diffs),
        samples: total,
        seed: 0,
        exact: true,
    }
}

/// p = (hits + 1) / (samples + 1) over random sign patterns. Sampling is split into shards,
/// each with its own stream of the seeded generator, so the result does not depend on
/// the thread count.
pub fn randomization_monte_carlo(diffs: &[f64], samples: u64, seed: u64) -> Result<SigTestResult> {
    if samples == 0 {
        return Err(Error::InvalidParameter("randomization samples must be >= 1".into()));
    }
    let limit = threshold(diffs);
    let shards = (samples as usize).div_ceil(SHARD);
    let count: u64 = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard as u64);
            let n = SHARD.min(samples as usize - shard * SHARD);
            let mut hits = 0u64;
            for _ in 0..n {
                let s: f64 = diffs.iter().map(|&d| if rng.gen::<bool>() { -d } else { d }).sum();
                if s.abs() >= limit {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(SigTestResult {
        p_value: (count + 1) as f64 / (samples + 1) as f64,
        observed_mean_diff: mean_of(diffs),
        samples,
        seed,
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(v: &[f64]) -> BTreeMap<String, f64> {
        v.iter().enumerate().map(|(i, &x)| (format!("q{i:02}"), x)).collect()
    }

    #[test]
    fn identical_systems_give_one() {
        let a = map(&[0.1, 0.5, 0.3]);
        assert_eq!(fisher_randomization(&a, &a, 1000, 1).unwrap().p_value, 1.0);
        let big = map(&vec![0.25; 30]);
        assert_eq!(fisher_randomization(&big, &big, 1000, 1).unwrap().p_value, 1.0);
    }

    #[test]
    fn two_query_hand_example() {
        let r = fisher_randomization(&map(&[0.3, 0.6]), &map(&[0.2, 0.5]), 10, 0).unwrap();
        assert!(r.exact);
        assert_eq!(r.p_value, 0.5);
        assert!((r.observed_mean_diff - 0.1).abs() < 1e-12);
    }

    #[test]
    fn mismatched_queries_rejected() {
        let a = map(&[0.1, 0.2]);
        let mut b = a.clone();
        b.insert("other".into(), 0.3);
        assert!(matches!(fisher_randomization(&a, &b, 10, 0), Err(Error::QueryMismatch(_))));
    }

    #[test]
    fn monte_carlo_is_deterministic_and_symmetric() {
        let a = map(&(0..25).map(|i| (i as f64 * 0.37).sin().abs()).collect::<Vec<_>>());
        let b = map(&(0..25).map(|i| (i as f64 * 0.11).cos().abs()).collect::<Vec<_>>());
        let x = fisher_randomization(&a, &b, 25_000, 7).unwrap();
        let y = fisher_randomization(&a, &b, 25_000, 7).unwrap();
        let z = fisher_randomization(&b, &a, 25_000, 7).unwrap();
        assert!(!x.exact);
        assert_eq!(x, y);
        assert_eq!(x.p_value, z.p_value);
    }

    #[test]
    fn monte_carlo_agrees_with_exact_on_truncated_subset() {
        let diffs: Vec<f64> = (0..25).map(|i| ((i * 7919 % 13) as f64 - 5.0) / 40.0).collect();
        let samples = 100_000;
        let exact = randomization_exact(&diffs[..20]).p_value;
        let mc = randomization_monte_carlo(&diffs[..20], samples, 3).unwrap().p_value;
        let sd = (exact * (1.0 - exact) / samples as f64).sqrt();
        assert!((mc - exact).abs() <= 3.0 * sd + 1.0 / samples as f64, "{mc} vs {exact}");
    }
}
