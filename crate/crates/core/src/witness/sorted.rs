//! Sorted samples with cumulative sums, so that region statistics at any
//! `(center, S)` cost two binary searches. Bootstrap resamples reuse the
//! same sorted values with multiplicity weights.

use crate::error::{Error, Region, Result};

use super::{BinningSpec, RegionMoments, RegionStats, MIN_REGION_SAMPLES};

#[derive(Debug, Clone)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::BadSample {
                index,
                reason: "non-finite sample".into(),
            });
        }
        let mut values = samples.to_vec();
        values.sort_by(f64::total_cmp);
        Ok(SortedSample { values })
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

    pub fn prefix(&self) -> PrefixStats<'_> {
        PrefixStats::build(&self.values, None, Vec::new())
    }

    /// Prefix sums where sample `i` (in sorted order) appears `counts[i]` times.
    pub fn prefix_weighted(&self, counts: &[u32]) -> PrefixStats<'_> {
        assert_eq!(counts.len(), self.values.len());
        PrefixStats::build(&self.values, Some(counts), Vec::new())
    }

    /// As [`prefix_weighted`](Self::prefix_weighted), reusing `buffer` for
    /// the cumulative sums. Recover it with [`PrefixStats::into_buffer`].
    pub fn prefix_weighted_in(&self, counts: &[u32], buffer: Vec<[f64; 3]>) -> PrefixStats<'_> {
        assert_eq!(counts.len(), self.values.len());
        PrefixStats::build(&self.values, Some(counts), buffer)
    }
}

/// Cumulative `(weight, sum, sum of squares)` about a fixed origin.
#[derive(Debug, Clone)]
pub struct PrefixStats<'a> {
    values: &'a [f64],
    origin: f64,
    cumulative: Vec<[f64; 3]>,
}

impl<'a> PrefixStats<'a> {
    fn build(values: &'a [f64], counts: Option<&[u32]>, mut cumulative: Vec<[f64; 3]>) -> Self {
        let origin = match counts {
            None => values.iter().sum::<f64>() / values.len() as f64,
            Some(c) => {
                let (w, s) = values
                    .iter()
                    .zip(c)
                    .fold((0.0, 0.0), |(w, s), (&v, &c)| (w + c as f64, s + c as f64 * v));
                s / w
            }
        };
        cumulative.clear();
        cumulative.reserve(values.len() + 1);
        let mut acc = [0.0f64; 3];
        cumulative.push(acc);
        for (i, &v) in values.iter().enumerate() {
            let w = counts.map_or(1.0, |c| c[i] as f64);
            let d = v - origin;
            acc[0] += w;
            acc[1] += w * d;
            acc[2] += w * d * d;
            cumulative.push(acc);
        }
        PrefixStats {
            values,
            origin,
            cumulative,
        }
    }

    fn range(&self, start: usize, end: usize) -> [f64; 3] {
        let a = self.cumulative[start];
        let b = self.cumulative[end];
        [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
    }

    pub fn into_buffer(self) -> Vec<[f64; 3]> {
        self.cumulative
    }

    pub fn total_weight(&self) -> f64 {
        self.cumulative[self.values.len()][0]
    }

    /// Weighted sample mean.
    pub fn mean(&self) -> f64 {
        let [w, s, _] = self.range(0, self.values.len());
        self.origin + s / w
    }

    pub fn variance(&self) -> f64 {
        let [w, s, q] = self.range(0, self.values.len());
        (q - s * s / w) / (w - 1.0)
    }

    /// Sorted-index boundaries `(end of I=-1, start of I=+1)`.
    fn split(&self, bins: &BinningSpec) -> (usize, usize) {
        let upper = bins.upper();
        let lower = bins.lower();
        let plus_start = self.values.partition_point(|&v| v < upper);
        let minus_end = self.values.partition_point(|&v| v <= lower).min(plus_start);
        (minus_end, plus_start)
    }

    fn moments(&self, start: usize, end: usize, center: f64) -> RegionMoments {
        let [w, s, q] = self.range(start, end);
        if w == 0.0 {
            return RegionMoments {
                prob: 0.0,
                mean: 0.0,
                var: 0.0,
                count: Some(0),
            };
        }
        let m = s / w;
        let var = if w > 1.0 { ((q - s * m) / (w - 1.0)).max(0.0) } else { 0.0 };
        RegionMoments {
            prob: w / self.total_weight(),
            mean: m + (self.origin - center),
            var,
            count: Some(w as usize),
        }
    }

    /// Same statistics as [`super::region_stats_empirical`] on the
    /// (weighted) sample.
    pub fn region_stats(&self, bins: &BinningSpec) -> Result<RegionStats> {
        let n = self.values.len();
        let (minus_end, plus_start) = self.split(bins);
        let minus = self.moments(0, minus_end, bins.center);
        let middle = self.moments(minus_end, plus_start, bins.center);
        let plus = self.moments(plus_start, n, bins.center);
        for (region, m) in [(Region::Minus, &minus), (Region::Plus, &plus)] {
            let count = m.count.unwrap_or(0);
            if count < MIN_REGION_SAMPLES {
                return Err(Error::InsufficientRegionSamples {
                    region,
                    count,
                    required: MIN_REGION_SAMPLES,
                });
            }
        }
        Ok(RegionStats {
            bins: *bins,
            minus,
            middle,
            plus,
            mean_x: self.mean(),
            var_x: self.variance(),
            sample_count: Some(self.total_weight() as usize),
        })
    }

    /// Largest `S` at which both outer regions around `center` still hold
    /// [`MIN_REGION_SAMPLES`] samples.
    pub fn outer_ceiling(&self, center: f64) -> f64 {
        let need = MIN_REGION_SAMPLES as f64;
        let n = self.values.len();
        let low_idx = self.cumulative[1..].partition_point(|c| c[0] < need);
        let total = self.total_weight();
        let high_idx = self.cumulative[..n].partition_point(|c| total - c[0] >= need);
        if low_idx >= n || high_idx == 0 {
            return 0.0;
        }
        let low = self.values[low_idx];
        let high = self.values[high_idx - 1];
        (2.0 * (center - low).min(high - center)).max(0.0)
    }
}
