//! Concentration and burstiness metrics over samples of nonnegative values.
//!
//! All functions here are pure and safe to call from any number of threads.

use thiserror::Error;

/// Errors from the metric computations.
#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("sample is empty")]
    EmptySample,
    #[error("sample mean is zero; metric is undefined on all-zero input")]
    ZeroMean,
    #[error("fraction {0} is outside the open interval (0, 1)")]
    FractionOutOfRange(f64),
    #[error("series has zero variance")]
    DegenerateSeries,
    #[error("series needs at least {needed} entries, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("log-bin base must be a finite number > 1, got {0}")]
    BadBase(f64),
    #[error("value at index {index} is negative or not finite: {value}")]
    InvalidValue { index: usize, value: f64 },
}

/// A sample of nonnegative real measurements (follower counts, retweets,
/// mentions, friends, tweets). Construction validates every entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSample {
    values: Vec<f64>,
}

impl ValueSample {
    /// Builds a sample, rejecting negative or non-finite entries.
    /// Empty samples are representable; the metrics that need data report
    /// [`MetricError::EmptySample`] themselves.
    pub fn new(values: Vec<f64>) -> Result<Self, MetricError> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(MetricError::InvalidValue { index, value });
            }
        }
        Ok(Self { values })
    }

    /// Convenience constructor from integer counts.
    pub fn from_counts(counts: &[u64]) -> Self {
        Self {
            values: counts.iter().map(|&c| c as f64).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    fn sorted_ascending(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Cumulative value share against cumulative population fraction.
///
/// Points are ascending in population fraction, start at (0, 0), end at
/// (1, 1), and lie on or below the `y = x` diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LorenzCurve {
    points: Vec<(f64, f64)>,
}

impl LorenzCurve {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Area between the equality diagonal and the curve (trapezoid rule).
    /// Twice this gap is the Gini coefficient of the underlying sample.
    pub fn area_gap(&self) -> f64 {
        let mut under = 0.0;
        for pair in self.points.windows(2) {
            let (x0, y0) = pair[0];
            let (x1, y1) = pair[1];
            under += (x1 - x0) * (y0 + y1) * 0.5;
        }
        0.5 - under
    }

    /// CSV serialization with the `pop_frac,value_frac` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pop_frac,value_frac\n");
        for &(x, y) in &self.points {
            out.push_str(&crate::textfmt::fmt_f64(x));
            out.push(',');
            out.push_str(&crate::textfmt::fmt_f64(y));
            out.push('\n');
        }
        out
    }
}

/// Gini, Lorenz curve and top-share summary for one sample.
#[derive(Debug, Clone)]
pub struct InequalityReport {
    pub gini: f64,
    pub lorenz: LorenzCurve,
    /// (fraction, share) pairs, ascending in fraction.
    pub top_shares: Vec<(f64, f64)>,
}

impl InequalityReport {
    /// Computes all three summaries for the sample. `fractions` selects the
    /// top-share cut points (e.g. 0.01 and 0.20).
    pub fn compute(sample: &ValueSample, fractions: &[f64]) -> Result<Self, MetricError> {
        let gini_value = gini(sample)?;
        let lorenz_curve = lorenz(sample)?;
        let mut top_shares = Vec::with_capacity(fractions.len());
        for &fraction in fractions {
            top_shares.push((fraction, top_share(sample, fraction)?));
        }
        top_shares.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            gini: gini_value,
            lorenz: lorenz_curve,
            top_shares,
        })
    }
}

/// Per-period posting counts for one user; used for burstiness.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivitySeries {
    counts: Vec<u64>,
}

impl ActivitySeries {
    pub fn new(counts_per_period: Vec<u64>) -> Self {
        Self {
            counts: counts_per_period,
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

/// One geometric histogram bin. `lo == hi == 0` marks the dedicated zero bin.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub density: f64,
}

/// Logarithmically binned histogram.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
}

impl Histogram {
    pub fn total_count(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    /// CSV serialization with the `bin_lo,bin_hi,count,density` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count,density\n");
        for bin in &self.bins {
            out.push_str(&format!(
                "{},{},{},{}\n",
                crate::textfmt::fmt_f64(bin.lo),
                crate::textfmt::fmt_f64(bin.hi),
                bin.count,
                crate::textfmt::fmt_f64(bin.density)
            ));
        }
        out
    }
}

/// Gini coefficient of a sample of nonnegative values.
///
/// Uses the sorted O(N log N) form; it agrees with the naive pairwise mean
/// absolute difference divided by twice the mean. A single-element sample has
/// Gini 0 (the pairwise sum is empty). All-zero samples are rejected because
/// the normalization divides by the mean.
pub fn gini(sample: &ValueSample) -> Result<f64, MetricError> {
    let n = sample.len();
    if n == 0 {
        return Err(MetricError::EmptySample);
    }
    let total = sample.total();
    if total <= 0.0 {
        return Err(MetricError::ZeroMean);
    }
    let sorted = sample.sorted_ascending();
    let nf = n as f64;
    let mut weighted = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        // rank i+1 in ascending order
        weighted += (2.0 * (i as f64 + 1.0) - nf - 1.0) * x;
    }
    Ok(weighted / (nf * total))
}

/// Lorenz curve of a sample: values sorted ascending, point k at
/// (k/N, cumulative_k / total), with (0, 0) prepended.
pub fn lorenz(sample: &ValueSample) -> Result<LorenzCurve, MetricError> {
    let n = sample.len();
    if n == 0 {
        return Err(MetricError::EmptySample);
    }
    let total = sample.total();
    if total <= 0.0 {
        return Err(MetricError::ZeroMean);
    }
    let sorted = sample.sorted_ascending();
    let mut points = Vec::with_capacity(n + 1);
    points.push((0.0, 0.0));
    let mut cumulative = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        cumulative += x;
        points.push(((k as f64 + 1.0) / n as f64, cumulative / total));
    }
    // Guard against summation drift in the final point.
    if let Some(last) = points.last_mut() {
        last.1 = 1.0;
    }
    Ok(LorenzCurve { points })
}

/// Share of the total held by the ceil(fraction * N) largest values.
pub fn top_share(sample: &ValueSample, fraction: f64) -> Result<f64, MetricError> {
    if fraction.is_nan() || fraction <= 0.0 || fraction >= 1.0 {
        return Err(MetricError::FractionOutOfRange(fraction));
    }
    let n = sample.len();
    if n == 0 {
        return Err(MetricError::EmptySample);
    }
    let total = sample.total();
    if total <= 0.0 {
        return Err(MetricError::ZeroMean);
    }
    // The tiny slack keeps fraction * N from ceiling up on representation
    // noise (e.g. 0.2 * 55 landing epsilon above 11).
    let k = ((fraction * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let sorted = sample.sorted_ascending();
    let top: f64 = sorted[n - k..].iter().sum();
    Ok(top / total)
}

/// Kurtosis of a real-valued series: the population fourth central moment
/// over the squared population second central moment. Translation- and
/// scale-invariant; equals 3 for Gaussian data.
pub fn kurtosis(values: &[f64]) -> Result<f64, MetricError> {
    let n = values.len();
    if n < 2 {
        return Err(MetricError::TooShort { needed: 2, got: n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &x in values {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n as f64;
    m4 /= n as f64;
    if m2 <= 0.0 {
        return Err(MetricError::DegenerateSeries);
    }
    Ok(m4 / (m2 * m2))
}

/// Burstiness of a posting series: kurtosis of the per-period tweet counts.
/// High values indicate spiky posting concentrated in few periods.
pub fn kurtosis_burstiness(series: &ActivitySeries) -> Result<f64, MetricError> {
    let values: Vec<f64> = series.counts.iter().map(|&c| c as f64).collect();
    kurtosis(&values)
}

/// Histogram over geometric bin edges base^k (k may be negative for values
/// below 1). Zeros cannot live on a log scale and are collected in a
/// dedicated leading bin with `lo == hi == 0` and density `count / N`.
/// Positive-bin density is `count / (N * bin_width)`.
pub fn log_bin(sample: &ValueSample, base: f64) -> Result<Histogram, MetricError> {
    if !base.is_finite() || base <= 1.0 {
        return Err(MetricError::BadBase(base));
    }
    if sample.is_empty() {
        return Ok(Histogram::default());
    }
    let n = sample.len() as f64;
    let mut zero_count = 0u64;
    let mut counts: std::collections::BTreeMap<i32, u64> = std::collections::BTreeMap::new();
    for &v in sample.values() {
        if v == 0.0 {
            zero_count += 1;
            continue;
        }
        let mut k = (v.ln() / base.ln()).floor() as i32;
        // Place boundary values exactly despite floating-point log noise.
        while v < base.powi(k) {
            k -= 1;
        }
        while v >= base.powi(k + 1) {
            k += 1;
        }
        *counts.entry(k).or_insert(0) += 1;
    }
    let mut bins = Vec::with_capacity(counts.len() + 1);
    if zero_count > 0 {
        bins.push(HistogramBin {
            lo: 0.0,
            hi: 0.0,
            count: zero_count,
            density: zero_count as f64 / n,
        });
    }
    for (k, count) in counts {
        let lo = base.powi(k);
        let hi = base.powi(k + 1);
        bins.push(HistogramBin {
            lo,
            hi,
            count,
            density: count as f64 / (n * (hi - lo)),
        });
    }
    Ok(Histogram { bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, LogNormal, Normal, Pareto};
    use rand_pcg::Pcg64;

    fn sample(values: &[f64]) -> ValueSample {
        ValueSample::new(values.to_vec()).unwrap()
    }

    /// Naive pairwise oracle: sum |x_i - x_j| over all ordered pairs,
    /// divided by 2 N^2 mean.
    fn gini_pairwise(values: &[f64]) -> f64 {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let mut acc = 0.0;
        for &a in values {
            for &b in values {
                acc += (a - b).abs();
            }
        }
        acc / (2.0 * n * n * mean)
    }

    #[test]
    fn gini_perfect_equality_is_zero() {
        assert_eq!(gini(&sample(&[5.0, 5.0, 5.0, 5.0])).unwrap(), 0.0);
    }

    #[test]
    fn gini_single_nonzero_gives_n_minus_one_over_n() {
        let g = gini(&sample(&[8.0, 0.0, 0.0, 0.0])).unwrap();
        assert!((g - 0.75).abs() < 1e-12);
    }

    #[test]
    fn gini_matches_pairwise_oracle_on_small_sample() {
        // Oracle: sum over ordered pairs of [1,2,3,4] is 20; 2 N^2 mean = 80.
        let values = [1.0, 2.0, 3.0, 4.0];
        assert!((gini_pairwise(&values) - 0.25).abs() < 1e-15);
        let g = gini(&sample(&values)).unwrap();
        assert!((g - 0.25).abs() < 1e-12);
    }

    #[test]
    fn gini_rejects_empty_and_all_zero() {
        assert_eq!(
            gini(&ValueSample::new(vec![]).unwrap()),
            Err(MetricError::EmptySample)
        );
        assert_eq!(gini(&sample(&[0.0, 0.0])), Err(MetricError::ZeroMean));
    }

    #[test]
    fn gini_of_single_element_is_zero() {
        assert_eq!(gini(&sample(&[42.0])).unwrap(), 0.0);
    }

    #[test]
    fn value_sample_rejects_negative_and_non_finite() {
        assert!(ValueSample::new(vec![1.0, -2.0]).is_err());
        assert!(ValueSample::new(vec![f64::NAN]).is_err());
        assert!(ValueSample::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn lorenz_equality_is_diagonal() {
        let curve = lorenz(&sample(&[1.0, 1.0, 1.0, 1.0])).unwrap();
        let expected = [
            (0.0, 0.0),
            (0.25, 0.25),
            (0.5, 0.5),
            (0.75, 0.75),
            (1.0, 1.0),
        ];
        for (got, want) in curve.points().iter().zip(expected.iter()) {
            assert!((got.0 - want.0).abs() < 1e-12);
            assert!((got.1 - want.1).abs() < 1e-12);
        }
    }

    #[test]
    fn lorenz_two_values() {
        let curve = lorenz(&sample(&[3.0, 1.0])).unwrap();
        assert_eq!(curve.points().len(), 3);
        assert!((curve.points()[1].0 - 0.5).abs() < 1e-12);
        assert!((curve.points()[1].1 - 0.25).abs() < 1e-12);
        assert!((curve.points()[2].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lorenz_area_gap_matches_gini_on_random_positives() {
        // Trapezoid-area oracle against the gini operation.
        let mut rng = Pcg64::seed_from_u64(7);
        let dist = LogNormal::new(1.0, 1.5).unwrap();
        let values: Vec<f64> = (0..100).map(|_| dist.sample(&mut rng)).collect();
        let s = sample(&values);
        let g = gini(&s).unwrap();
        let curve = lorenz(&s).unwrap();
        assert!((2.0 * curve.area_gap() - g).abs() < 1e-9);
    }

    #[test]
    fn top_share_examples() {
        let s = sample(&[60.0, 20.0, 10.0, 6.0, 4.0]);
        assert!((top_share(&s, 0.20).unwrap() - 0.60).abs() < 1e-12);
        let eq = sample(&[1.0, 1.0, 1.0, 1.0, 1.0]);
        assert!((top_share(&eq, 0.20).unwrap() - 0.20).abs() < 1e-12);
    }

    #[test]
    fn top_share_fraction_bounds() {
        let s = sample(&[1.0, 2.0]);
        assert_eq!(
            top_share(&s, 0.0),
            Err(MetricError::FractionOutOfRange(0.0))
        );
        assert_eq!(
            top_share(&s, 1.0),
            Err(MetricError::FractionOutOfRange(1.0))
        );
        // fraction approaching 1 takes every value
        assert!((top_share(&s, 0.999999).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kurtosis_degenerate_and_short_inputs() {
        assert_eq!(
            kurtosis_burstiness(&ActivitySeries::new(vec![3, 3, 3, 3])),
            Err(MetricError::DegenerateSeries)
        );
        assert_eq!(
            kurtosis_burstiness(&ActivitySeries::new(vec![3])),
            Err(MetricError::TooShort { needed: 2, got: 1 })
        );
    }

    #[test]
    fn kurtosis_spike_series() {
        // Direct moment oracle: mean 1, deviations (-1,-1,-1,3),
        // m2 = 3, m4 = 21, ratio 21/9.
        let k = kurtosis_burstiness(&ActivitySeries::new(vec![0, 0, 0, 4])).unwrap();
        assert!((k - 21.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn kurtosis_of_normal_draws_is_three() {
        let mut rng = Pcg64::seed_from_u64(11);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let values: Vec<f64> = (0..100_000).map(|_| normal.sample(&mut rng)).collect();
        let k = kurtosis(&values).unwrap();
        assert!((k - 3.0).abs() < 0.1, "kurtosis {k}");
    }

    #[test]
    fn log_bin_conserves_counts() {
        let values: Vec<f64> = (1..=1000).map(|v| v as f64).collect();
        let hist = log_bin(&sample(&values), 2.0).unwrap();
        assert_eq!(hist.total_count(), 1000);
    }

    #[test]
    fn log_bin_empty_input_gives_empty_histogram() {
        let hist = log_bin(&ValueSample::new(vec![]).unwrap(), 2.0).unwrap();
        assert!(hist.bins.is_empty());
    }

    #[test]
    fn log_bin_zero_values_get_their_own_bin() {
        let hist = log_bin(&sample(&[0.0, 0.0, 1.0, 2.0, 4.0]), 2.0).unwrap();
        assert_eq!(hist.bins[0].lo, 0.0);
        assert_eq!(hist.bins[0].hi, 0.0);
        assert_eq!(hist.bins[0].count, 2);
        assert_eq!(hist.total_count(), 5);
    }

    #[test]
    fn log_bin_rejects_bad_base() {
        let s = sample(&[1.0]);
        assert_eq!(log_bin(&s, 1.0), Err(MetricError::BadBase(1.0)));
        assert_eq!(log_bin(&s, 0.5), Err(MetricError::BadBase(0.5)));
    }

    #[test]
    fn log_bin_boundary_values_land_in_the_right_bin() {
        let hist = log_bin(&sample(&[1.0, 2.0, 4.0, 8.0]), 2.0).unwrap();
        // Each value sits exactly on a lower edge; one per bin.
        assert_eq!(hist.bins.len(), 4);
        for bin in &hist.bins {
            assert_eq!(bin.count, 1);
        }
    }

    #[test]
    fn log_bin_pareto_densities_decay_past_the_mode() {
        // Direct histogram oracle on a heavy-tailed sample.
        let mut rng = Pcg64::seed_from_u64(3);
        let pareto = Pareto::new(1.0, 1.5).unwrap();
        let values: Vec<f64> = (0..20_000).map(|_| pareto.sample(&mut rng)).collect();
        let hist = log_bin(&sample(&values), 2.0).unwrap();
        assert_eq!(hist.total_count(), 20_000);
        let densities: Vec<f64> = hist.bins.iter().map(|b| b.density).collect();
        let mode = densities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        for pair in densities[mode..].windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "density rose past the mode");
        }
    }

    #[test]
    fn csv_serializations_carry_the_contract_headers() {
        let s = sample(&[1.0, 3.0]);
        let curve_csv = lorenz(&s).unwrap().to_csv();
        assert!(curve_csv.starts_with("pop_frac,value_frac\n"));
        assert_eq!(curve_csv.lines().count(), 4);
        let hist_csv = log_bin(&s, 2.0).unwrap().to_csv();
        assert!(hist_csv.starts_with("bin_lo,bin_hi,count,density\n"));
    }

    #[test]
    fn report_gini_matches_twice_area_gap() {
        let s = sample(&[4.0, 1.0, 7.0, 2.0, 9.0, 0.0]);
        let report = InequalityReport::compute(&s, &[0.01, 0.20]).unwrap();
        assert!((report.gini - 2.0 * report.lorenz.area_gap()).abs() < 1e-9);
        assert_eq!(report.top_shares.len(), 2);
    }
}
