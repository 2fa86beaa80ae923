//! Descriptive statistics and bootstrap resampling.

use rand::Rng;

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for a single value.
pub fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mu = mean(values);
    let ss: f64 = values.iter().map(|v| (v - mu) * (v - mu)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.low <= v && v <= self.high
    }

    /// Strictly below `other` with no overlap.
    pub fn below(&self, other: &Interval) -> bool {
        self.high < other.low
    }
}

fn resample_mean<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> f64 {
    let n = values.len();
    (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64
}

fn percentile_interval(mut stats: Vec<f64>, level: f64) -> Interval {
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Interval {
        low: quantile_sorted(&stats, tail),
        high: quantile_sorted(&stats, 1.0 - tail),
    }
}

/// Percentile bootstrap interval for the mean, widened if needed so that it
/// always contains the sample mean.
pub fn bootstrap_mean_ci<R: Rng + ?Sized>(
    values: &[f64],
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> Interval {
    let mu = mean(values);
    if values.is_empty() || resamples == 0 {
        return Interval { low: mu, high: mu };
    }
    let stats = (0..resamples).map(|_| resample_mean(values, rng)).collect();
    let ci = percentile_interval(stats, level);
    Interval {
        low: ci.low.min(mu),
        high: ci.high.max(mu),
    }
}

/// One-sided bootstrap p-value for `mean(differences) > 0`.
///
/// The differences are shifted to mean zero (the null), resampled, and the
/// p-value is the smoothed share of null means at least as large as the
/// observed mean: `(1 + #{null >= observed}) / (B + 1)`.
pub fn paired_bootstrap_p<R: Rng + ?Sized>(
    differences: &[f64],
    resamples: usize,
    rng: &mut R,
) -> f64 {
    let observed = mean(differences);
    if differences.is_empty() || differences.iter().all(|&d| d == differences[0]) {
        // Degenerate resampling distribution: every null mean equals zero.
        return if observed > 0.0 {
            1.0 / (resamples as f64 + 1.0)
        } else {
            1.0
        };
    }
    let centered: Vec<f64> = differences.iter().map(|d| d - observed).collect();
    let extreme = (0..resamples)
        .filter(|_| resample_mean(&centered, rng) >= observed)
        .count();
    (1 + extreme) as f64 / (resamples + 1) as f64
}

/// `max - min` of column means.
pub fn spread_of_means(columns: &[Vec<f64>]) -> f64 {
    let means: Vec<f64> = columns.iter().map(|c| mean(c)).collect();
    let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = means.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Bootstrap interval for [`spread_of_means`] where the columns are paired by
/// row (common random numbers): rows are resampled jointly.
pub fn bootstrap_spread_ci<R: Rng + ?Sized>(
    columns: &[Vec<f64>],
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> Interval {
    let point = spread_of_means(columns);
    let rows = columns.first().map_or(0, Vec::len);
    assert!(
        columns.iter().all(|c| c.len() == rows),
        "columns must be paired"
    );
    if rows == 0 || resamples == 0 {
        return Interval {
            low: point,
            high: point,
        };
    }
    let mut sums = vec![0.0; columns.len()];
    let stats = (0..resamples)
        .map(|_| {
            sums.iter_mut().for_each(|s| *s = 0.0);
            for _ in 0..rows {
                let r = rng.gen_range(0..rows);
                for (s, c) in sums.iter_mut().zip(columns) {
                    *s += c[r];
                }
            }
            let max = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = sums.iter().copied().fold(f64::INFINITY, f64::min);
            (max - min) / rows as f64
        })
        .collect();
    let ci = percentile_interval(stats, level);
    Interval {
        low: ci.low.min(point),
        high: ci.high.max(point),
    }
}
