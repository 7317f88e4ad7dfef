//! Interval estimates: Wilson for proportions, percentile bootstrap for
//! everything else. Bootstrap resampling is sequential and seeded so that
//! reports are reproducible byte for byte.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::pairwise_mean;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    Wilson,
    BootstrapPercentile,
    Normal,
}

/// Two-sided interval at the stated level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "super::lossless")]
    pub lo: f64,
    #[serde(with = "super::lossless")]
    pub hi: f64,
    pub level: f64,
    pub method: IntervalMethod,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes / trials` at 95%.
pub fn wilson(successes: usize, trials: usize) -> Result<Interval> {
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    if successes > trials {
        return Err(invalid("successes", format!("{successes} > {trials} trials")));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z_95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Ok(Interval {
        // the endpoints are exact at the extremes; avoid rounding residue
        lo: if successes == 0 { 0.0 } else { (centre - half).max(0.0) },
        hi: if successes == trials { 1.0 } else { (centre + half).min(1.0) },
        level: 0.95,
        method: IntervalMethod::Wilson,
    })
}

pub const DEFAULT_RESAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct Bootstrap {
    pub estimate: f64,
    /// Standard deviation of the resampled statistic.
    pub standard_error: f64,
    pub interval: Interval,
}

/// Percentile bootstrap of `statistic` over `n` exchangeable units. The
/// statistic receives the indices of one resample (with repetition).
pub fn bootstrap<F>(n: usize, resamples: usize, seed: u64, statistic: F) -> Result<Bootstrap>
where
    F: Fn(&[usize]) -> f64,
{
    if n < 2 {
        return Err(invalid("replicas", "bootstrap needs at least 2 units"));
    }
    if resamples < 2 {
        return Err(invalid("resamples", "must be >= 2"));
    }
    let all: Vec<usize> = (0..n).collect();
    let estimate = statistic(&all);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = vec![0usize; n];
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for slot in idx.iter_mut() {
            *slot = rng.random_range(0..n);
        }
        stats.push(statistic(&idx));
    }
    let mean = pairwise_mean(&stats);
    let var = pairwise_mean(&stats.iter().map(|s| (s - mean) * (s - mean)).collect::<Vec<_>>())
        * resamples as f64
        / (resamples - 1) as f64;
    stats.sort_by(f64::total_cmp);
    Ok(Bootstrap {
        estimate,
        standard_error: var.sqrt(),
        interval: Interval {
            lo: quantile_sorted(&stats, 0.025),
            hi: quantile_sorted(&stats, 0.975),
            level: 0.95,
            method: IntervalMethod::BootstrapPercentile,
        },
    })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // closed form with z = 1.96: 0 of 10 gives [0, z²/(n+z²)]
        let i = wilson(0, 10).unwrap();
        assert_eq!(i.lo, 0.0);
        let z2 = Z_95 * Z_95;
        assert!((i.hi - z2 / (10.0 + z2)).abs() < 1e-15);
        // 5/10 is symmetric about 1/2
        let j = wilson(5, 10).unwrap();
        assert!((j.lo + j.hi - 1.0).abs() < 1e-15);
        // statsmodels proportion_confint(5, 10, method="wilson")
        assert!((j.hi - 0.763_406_909_487_436).abs() < 1e-12);
        assert!(wilson(3, 2).is_err());
    }

    #[test]
    fn bootstrap_of_mean_matches_textbook_se() {
        let data: Vec<f64> = (0..400).map(|i| ((i * 7919) % 400) as f64 / 400.0).collect();
        let b = bootstrap(data.len(), 2000, 1, |idx| {
            pairwise_mean(&idx.iter().map(|&i| data[i]).collect::<Vec<_>>())
        })
        .unwrap();
        // uniform grid on [0,1): sd ≈ 1/√12, se ≈ sd/√n
        let se = (1.0f64 / 12.0).sqrt() / 20.0;
        assert!((b.standard_error / se - 1.0).abs() < 0.1, "{}", b.standard_error);
        assert!(b.interval.contains(b.estimate));
        let again = bootstrap(data.len(), 2000, 1, |idx| {
            pairwise_mean(&idx.iter().map(|&i| data[i]).collect::<Vec<_>>())
        })
        .unwrap();
        assert_eq!(b, again);
    }

    #[test]
    fn quantiles() {
        let s = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.5), 2.0);
        assert_eq!(quantile_sorted(&s, 0.125), 0.5);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
    }
}
