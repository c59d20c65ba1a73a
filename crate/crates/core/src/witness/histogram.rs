//! Separately normalized density histograms of the three regions.
//!
//! Each region gets its own grid anchored on its boundary, so the outer
//! supports end exactly at `c - S/2` and start exactly at `c + S/2`. The
//! middle region's last bin is cut at `c + S/2` and normalized by its actual
//! width. The unbinned density shares the grid anchored at `c + S/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Region, Result};

use super::BinningSpec;

const MAX_BINS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `None` for the unbinned distribution.
    pub region: Option<Region>,
    /// Ascending bin edges; `density.len() + 1` entries, or none when empty.
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub count: usize,
}

impl Histogram {
    fn empty(region: Option<Region>) -> Self {
        Histogram {
            region,
            edges: Vec::new(),
            density: Vec::new(),
            count: 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Integral of the density; 1 for every nonempty histogram.
    pub fn mass(&self) -> f64 {
        self.density
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }

    /// `(lowest edge, highest edge)`.
    pub fn support(&self) -> Option<(f64, f64)> {
        Some((*self.edges.first()?, *self.edges.last()?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionHistograms {
    pub bins: BinningSpec,
    pub bin_width: f64,
    pub all: Histogram,
    pub minus: Histogram,
    pub middle: Histogram,
    pub plus: Histogram,
}

impl RegionHistograms {
    pub fn iter(&self) -> impl Iterator<Item = &Histogram> {
        [&self.all, &self.minus, &self.middle, &self.plus].into_iter()
    }
}

fn bin_count(span: f64, width: f64) -> Result<usize> {
    let n = (span / width).floor() + 1.0;
    if n > MAX_BINS as f64 {
        return Err(Error::param("bin_width", "too small for the data span"));
    }
    Ok(n as usize)
}

fn finish(region: Option<Region>, edges: Vec<f64>, counts: Vec<usize>) -> Histogram {
    let total: usize = counts.iter().sum();
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, e)| c as f64 / (total as f64 * (e[1] - e[0])))
        .collect();
    Histogram {
        region,
        edges,
        density,
        count: total,
    }
}

pub fn region_histograms(samples: &[f64], bins: &BinningSpec, bin_width: f64) -> Result<RegionHistograms> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::param("bin_width", format!("must be positive, got {bin_width}")));
    }
    if samples.is_empty() {
        return Err(Error::EmptySeries);
    }
    let lower = bins.lower();
    let upper = bins.upper();
    let mut minus = Vec::new();
    let mut middle = Vec::new();
    let mut plus = Vec::new();
    for &x in samples {
        match bins.region_of(x) {
            Region::Minus => minus.push(x),
            Region::Middle => middle.push(x),
            Region::Plus => plus.push(x),
        }
    }
    let (min, max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));

    // I=+1: [upper + k w, upper + (k+1) w)
    let plus_hist = if plus.is_empty() {
        Histogram::empty(Some(Region::Plus))
    } else {
        let n = bin_count(max - upper, bin_width)?;
        let mut counts = vec![0; n];
        for &x in &plus {
            counts[(((x - upper) / bin_width).floor() as usize).min(n - 1)] += 1;
        }
        let edges = (0..=n).map(|k| upper + k as f64 * bin_width).collect();
        finish(Some(Region::Plus), edges, counts)
    };

    // I=-1: (lower - (k+1) w, lower - k w], built top-down
    let minus_hist = if minus.is_empty() {
        Histogram::empty(Some(Region::Minus))
    } else {
        let n = bin_count(lower - min, bin_width)?;
        let mut counts = vec![0; n];
        for &x in &minus {
            let k = (((lower - x) / bin_width).floor() as usize).min(n - 1);
            counts[n - 1 - k] += 1;
        }
        let edges = (0..=n).map(|k| lower - (n - k) as f64 * bin_width).collect();
        finish(Some(Region::Minus), edges, counts)
    };

    let middle_hist = if middle.is_empty() {
        Histogram::empty(Some(Region::Middle))
    } else {
        let n = ((upper - lower) / bin_width).ceil().max(1.0) as usize;
        if n > MAX_BINS {
            return Err(Error::param("bin_width", "too small for the gap"));
        }
        let mut counts = vec![0; n];
        for &x in &middle {
            counts[(((x - lower) / bin_width).floor() as usize).min(n - 1)] += 1;
        }
        let mut edges: Vec<f64> = (0..n).map(|k| lower + k as f64 * bin_width).collect();
        edges.push(upper);
        finish(Some(Region::Middle), edges, counts)
    };

    let all_hist = {
        let first = ((min - upper) / bin_width).floor() as i64;
        let last = ((max - upper) / bin_width).floor() as i64;
        let n = (last - first + 1) as usize;
        if n > MAX_BINS {
            return Err(Error::param("bin_width", "too small for the data span"));
        }
        let mut counts = vec![0; n];
        for &x in samples {
            let k = ((x - upper) / bin_width).floor() as i64;
            counts[((k - first) as usize).min(n - 1)] += 1;
        }
        let edges = (0..=n as i64)
            .map(|k| upper + (first + k) as f64 * bin_width)
            .collect();
        finish(None, edges, counts)
    };

    Ok(RegionHistograms {
        bins: *bins,
        bin_width,
        all: all_hist,
        minus: minus_hist,
        middle: middle_hist,
        plus: plus_hist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_samples() -> Vec<f64> {
        (0..2001).map(|i| -3.0 + 0.003 * i as f64).collect()
    }

    #[test]
    fn each_histogram_is_normalized() {
        let bins = BinningSpec::new(0.83, 0.1).unwrap();
        let h = region_histograms(&grid_samples(), &bins, 0.05).unwrap();
        for hist in h.iter() {
            assert!((hist.mass() - 1.0).abs() < 1e-12, "{:?}", hist.region);
        }
        assert_eq!(h.all.count, 2001);
        assert_eq!(h.minus.count + h.middle.count + h.plus.count, 2001);
    }

    #[test]
    fn outer_supports_are_separated_by_distance() {
        let bins = BinningSpec::new(0.83, 0.0).unwrap();
        let h = region_histograms(&grid_samples(), &bins, 0.07).unwrap();
        let (_, minus_top) = h.minus.support().unwrap();
        let (plus_bottom, _) = h.plus.support().unwrap();
        assert!((plus_bottom - minus_top - 0.83).abs() < 1e-12);
        let (mid_lo, mid_hi) = h.middle.support().unwrap();
        assert_eq!((mid_lo, mid_hi), (minus_top, plus_bottom));
    }

    #[test]
    fn zero_distance_gives_two_halves() {
        let bins = BinningSpec::new(0.0, 0.0).unwrap();
        let h = region_histograms(&grid_samples(), &bins, 0.1).unwrap();
        assert!(h.middle.is_empty());
        assert!(!h.minus.is_empty() && !h.plus.is_empty());
    }

    #[test]
    fn single_sample_region() {
        let bins = BinningSpec::new(1.0, 0.0).unwrap();
        let h = region_histograms(&[-2.0, 0.1, 0.2, 3.0], &bins, 0.25).unwrap();
        assert_eq!(h.plus.density.len(), h.plus.edges.len() - 1);
        assert_eq!(h.plus.count, 1);
        assert_eq!(h.plus.density.iter().filter(|&&d| d > 0.0).count(), 1);
        assert!((h.plus.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gap_wider_than_data() {
        let bins = BinningSpec::new(100.0, 0.0).unwrap();
        let h = region_histograms(&grid_samples(), &bins, 0.1).unwrap();
        assert!(h.minus.is_empty() && h.plus.is_empty());
        assert_eq!(h.middle.count, 2001);
    }

    #[test]
    fn bad_width() {
        let bins = BinningSpec::new(1.0, 0.0).unwrap();
        assert!(region_histograms(&[1.0], &bins, 0.0).is_err());
        assert!(region_histograms(&[1.0], &bins, -1.0).is_err());
    }
}
