//! Uniform-sampling baseline for probabilistic sum estimates.
//!
//! Compressed-domain answers are deterministic; the classical alternative
//! estimates a sum from a uniform sample and only promises the error bound
//! with probability `1 - beta`. This module sizes such samples with the
//! Hoeffding bound so the two approaches can be compared at equal target
//! error: for a sum of `n` bounded values, the scaled sample mean misses the
//! true sum by more than `epsilon` with probability at most `beta` when
//!
//! ```text
//! m >= n^2 * (d_max - d_min)^2 * ln(2 / beta) / (2 * epsilon^2)
//! ```
//!
//! (capped at `n`: sampling everything is always enough). Sampling without
//! replacement only concentrates harder, so the bound stays valid.

use crate::core::TimeSeries;
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A sized sampling plan for a sum over `n` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPlan {
    /// Population size (positions in the summed range).
    pub n: usize,
    /// Required sample size.
    pub m: usize,
    /// Target absolute error on the sum.
    pub epsilon: f64,
    /// Failure probability budget.
    pub beta: f64,
}

/// Number of uniform samples needed so that the estimated sum of `n` values
/// in `value_range` is within `epsilon` of the truth with probability at
/// least `1 - beta`.
///
/// # Example
///
/// ```
/// use segbound::sampling::required_sample_size;
/// let m = required_sample_size(1000, 50.0, 0.05, (0.0, 1.0)).unwrap();
/// assert_eq!(m, 738);
/// ```
pub fn required_sample_size(
    n: usize,
    epsilon: f64,
    beta: f64,
    value_range: (f64, f64),
) -> Result<usize> {
    if n == 0 {
        return Err(Error::invalid_argument("population must be non-empty"));
    }
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::invalid_argument("epsilon must be finite and > 0"));
    }
    if !(0.0..1.0).contains(&beta) || beta == 0.0 {
        return Err(Error::invalid_argument("beta must lie in (0, 1)"));
    }
    let (lo, hi) = value_range;
    if !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::invalid_argument("value range must be finite with min <= max"));
    }
    let spread = hi - lo;
    if spread == 0.0 {
        // Constant values: a single sample determines the sum exactly.
        return Ok(1);
    }
    let nf = n as f64;
    let m = (nf * nf * spread * spread * (2.0 / beta).ln() / (2.0 * epsilon * epsilon)).ceil();
    Ok((m as usize).min(n))
}

/// Estimates `sum_t t1(t) * t2(t)` over the domain intersection from `m`
/// uniform samples without replacement. Deterministic for a fixed `seed`.
///
/// Returns the scaled estimate `(n / m) * sum_{sampled} t1 * t2`.
pub fn sampled_sum_product(
    t1: &TimeSeries,
    t2: &TimeSeries,
    m: usize,
    seed: u64,
) -> Result<f64> {
    let common = t1.domain.intersect(&t2.domain).ok_or_else(|| {
        Error::incompatible(format!("domains {} and {} do not overlap", t1.domain, t2.domain))
    })?;
    let n = common.len();
    if m == 0 || m > n {
        return Err(Error::invalid_argument(format!(
            "sample size {m} must lie in 1..={n}"
        )));
    }
    let w1 = t1.window(&common)?;
    let w2 = t2.window(&common)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = rand::seq::index::sample(&mut rng, n, m);
    let picked: f64 = sample.iter().map(|i| w1[i] * w2[i]).sum();
    Ok(picked * n as f64 / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_sample_size() {
        // n = 1000 values in [0, 1], epsilon = 50, beta = 0.05:
        // 1e6 * ln(40) / 5000 = 737.78 -> 738.
        assert_eq!(required_sample_size(1000, 50.0, 0.05, (0.0, 1.0)).unwrap(), 738);
    }

    #[test]
    fn sample_size_caps_at_population() {
        assert_eq!(required_sample_size(1000, 1e-9, 0.05, (0.0, 1.0)).unwrap(), 1000);
        assert_eq!(required_sample_size(10, 100.0, 0.5, (0.0, 0.0)).unwrap(), 1);
    }

    #[test]
    fn parameter_validation() {
        assert!(required_sample_size(0, 1.0, 0.1, (0.0, 1.0)).is_err());
        assert!(required_sample_size(10, 0.0, 0.1, (0.0, 1.0)).is_err());
        assert!(required_sample_size(10, -1.0, 0.1, (0.0, 1.0)).is_err());
        assert!(required_sample_size(10, 1.0, 0.0, (0.0, 1.0)).is_err());
        assert!(required_sample_size(10, 1.0, 1.0, (0.0, 1.0)).is_err());
        assert!(required_sample_size(10, 1.0, 0.1, (1.0, 0.0)).is_err());
    }

    #[test]
    fn full_sample_is_exact() {
        let t1 = TimeSeries::new("T1", 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let t2 = TimeSeries::new("T2", 1, vec![2.0, 2.0, 2.0, 2.0]).unwrap();
        let exact: f64 = 2.0 * (1.0 + 2.0 + 3.0 + 4.0);
        let est = sampled_sum_product(&t1, &t2, 4, 7).unwrap();
        assert!((est - exact).abs() < 1e-12);
    }

    #[test]
    fn estimate_is_seed_deterministic_and_unbiased_ish() {
        let values1: Vec<f64> = (0..500).map(|i| ((i * 37) % 97) as f64 / 97.0).collect();
        let values2: Vec<f64> = (0..500).map(|i| ((i * 53) % 89) as f64 / 89.0).collect();
        let t1 = TimeSeries::new("T1", 0, values1.clone()).unwrap();
        let t2 = TimeSeries::new("T2", 0, values2.clone()).unwrap();
        let exact: f64 = values1.iter().zip(&values2).map(|(a, b)| a * b).sum();

        let e1 = sampled_sum_product(&t1, &t2, 200, 42).unwrap();
        let e2 = sampled_sum_product(&t1, &t2, 200, 42).unwrap();
        assert_eq!(e1, e2);

        // Mean over many seeds approaches the exact sum (law of large
        // numbers; wide tolerance keeps this robust).
        let trials = 400;
        let mean: f64 = (0..trials)
            .map(|s| sampled_sum_product(&t1, &t2, 200, s).unwrap())
            .sum::<f64>()
            / trials as f64;
        assert!((mean - exact).abs() < 0.05 * exact.abs());
    }

    #[test]
    fn disjoint_domains_and_bad_sample_sizes_error() {
        let t1 = TimeSeries::new("T1", 0, vec![1.0, 2.0]).unwrap();
        let t2 = TimeSeries::new("T2", 10, vec![1.0, 2.0]).unwrap();
        assert!(sampled_sum_product(&t1, &t2, 1, 0).is_err());
        let t3 = TimeSeries::new("T3", 0, vec![1.0, 2.0]).unwrap();
        assert!(sampled_sum_product(&t1, &t3, 0, 0).is_err());
        assert!(sampled_sum_product(&t1, &t3, 3, 0).is_err());
    }
}
