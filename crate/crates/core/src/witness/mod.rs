//! Three-region binning of `x`, region statistics and the witness inequality.
//!
//! Regions are `I=-1: x <= c - S/2`, `I=0: c - S/2 < x < c + S/2` and
//! `I=+1: x >= c + S/2`. A sample that satisfies both outer conditions
//! (only possible at `S = 0`, `x = c`) goes to `I=+1`.
//!
//! Region means are stored relative to the bin center `c`, which is the frame
//! the `delta` term uses. By default the center is the mean of the `x`
//! marginal (analytic) or the sample mean (empirical), which makes the
//! witness invariant under phase-space displacement.

mod bootstrap;
mod curve;
mod diagnostic;
mod histogram;
mod smax;
mod sorted;

pub use bootstrap::{bootstrap_uncertainty, BootstrapEstimate, BootstrapOptions, BootstrapTarget};
pub use curve::{contour_grid, theory_curve, ContourGrid, CurvePoint, GridRange};
pub use diagnostic::{no_coherence_bound, NoCoherenceDiagnostic};
pub use histogram::{region_histograms, Histogram, RegionHistograms};
pub use smax::{
    smax_analytic, smax_analytic_with, smax_empirical, SmaxEmpirical, SmaxOptions, SmaxResult,
    SmaxStatus,
};
pub use sorted::SortedSample;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Region, Result};
use crate::snu::GaussianStateSpec;
use crate::truncated::truncated_moments;

/// Minimum number of samples in each outer region for empirical statistics.
pub const MIN_REGION_SAMPLES: usize = 2;

/// Distance `S` between the outer regions and the bin center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub distance: f64,
    pub center: f64,
}

impl BinningSpec {
    pub fn new(distance: f64, center: f64) -> Result<Self> {
        if !(distance.is_finite() && distance >= 0.0) {
            return Err(Error::param(
                "distance",
                format!("must be finite and >= 0, got {distance}"),
            ));
        }
        if !center.is_finite() {
            return Err(Error::param("center", "must be finite"));
        }
        Ok(BinningSpec { distance, center })
    }

    pub fn lower(&self) -> f64 {
        self.center - 0.5 * self.distance
    }

    pub fn upper(&self) -> f64 {
        self.center + 0.5 * self.distance
    }

    pub fn region_of(&self, x: f64) -> Region {
        if x >= self.upper() {
            Region::Plus
        } else if x <= self.lower() {
            Region::Minus
        } else {
            Region::Middle
        }
    }
}

/// Where to put the bin center.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterPolicy {
    /// Mean of the `x` marginal, or the sample mean for data.
    #[default]
    Mean,
    Fixed(f64),
}

impl CenterPolicy {
    pub fn resolve(self, mean: f64) -> f64 {
        match self {
            CenterPolicy::Mean => mean,
            CenterPolicy::Fixed(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionMoments {
    pub prob: f64,
    /// Mean relative to the bin center.
    pub mean: f64,
    pub var: f64,
    /// Number of samples, for empirical statistics.
    pub count: Option<usize>,
}

impl RegionMoments {
    const EMPTY: RegionMoments = RegionMoments {
        prob: 0.0,
        mean: 0.0,
        var: 0.0,
        count: None,
    };
}

/// Statistics of the `x` distribution in the three regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub bins: BinningSpec,
    pub minus: RegionMoments,
    pub middle: RegionMoments,
    pub plus: RegionMoments,
    /// Mean of the whole distribution, absolute.
    pub mean_x: f64,
    pub var_x: f64,
    pub sample_count: Option<usize>,
}

impl RegionStats {
    pub fn region(&self, region: Region) -> &RegionMoments {
        match region {
            Region::Minus => &self.minus,
            Region::Middle => &self.middle,
            Region::Plus => &self.plus,
        }
    }

    pub fn distance(&self) -> f64 {
        self.bins.distance
    }

    /// `P+ var+ + P- var-`.
    pub fn ave_var_x(&self) -> f64 {
        self.plus.prob * self.plus.var + self.minus.prob * self.minus.var
    }
}

/// Exact truncated-normal statistics of the `x` marginal of a Gaussian state.
pub fn region_stats_analytic(state: &GaussianStateSpec, bins: &BinningSpec) -> Result<RegionStats> {
    state.validate()?;
    let half = 0.5 * bins.distance;
    // work relative to the center so large displacements cost no precision
    let offset = state.mean_x - bins.center;
    let outer = |lo: f64, hi: f64, region: Region| -> Result<RegionMoments> {
        match truncated_moments(offset, state.var_x, lo, hi) {
            Ok(m) => Ok(RegionMoments {
                prob: m.prob,
                mean: m.mean,
                var: m.var,
                count: None,
            }),
            Err(Error::NegligibleMass { .. }) => Err(Error::EmptyRegion { region }),
            Err(e) => Err(e),
        }
    };
    let minus = outer(f64::NEG_INFINITY, -half, Region::Minus)?;
    let plus = outer(half, f64::INFINITY, Region::Plus)?;
    let middle = if half > 0.0 {
        match truncated_moments(offset, state.var_x, -half, half) {
            Ok(m) => RegionMoments {
                prob: m.prob,
                mean: m.mean,
                var: m.var,
                count: None,
            },
            Err(Error::NegligibleMass { .. }) => RegionMoments::EMPTY,
            Err(e) => return Err(e),
        }
    } else {
        RegionMoments::EMPTY
    };
    Ok(RegionStats {
        bins: *bins,
        minus,
        middle,
        plus,
        mean_x: state.mean_x,
        var_x: state.var_x,
        sample_count: None,
    })
}

/// Per-region sample means and unbiased variances, two-pass.
pub fn region_stats_empirical(samples: &[f64], bins: &BinningSpec) -> Result<RegionStats> {
    if samples.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut count = [0usize; 3];
    let mut sum = [0.0f64; 3];
    for &x in samples {
        let i = index_of(bins.region_of(x));
        count[i] += 1;
        sum[i] += x - bins.center;
    }
    for region in [Region::Minus, Region::Plus] {
        let n = count[index_of(region)];
        if n < MIN_REGION_SAMPLES {
            return Err(Error::InsufficientRegionSamples {
                region,
                count: n,
                required: MIN_REGION_SAMPLES,
            });
        }
    }
    let mean: [f64; 3] = std::array::from_fn(|i| if count[i] > 0 { sum[i] / count[i] as f64 } else { 0.0 });
    let mut sq = [0.0f64; 3];
    for &x in samples {
        let i = index_of(bins.region_of(x));
        sq[i] += (x - bins.center - mean[i]).powi(2);
    }
    let n = samples.len();
    let total_mean = samples.iter().sum::<f64>() / n as f64;
    let total_var = if n > 1 {
        samples.iter().map(|x| (x - total_mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let moments = |i: usize| RegionMoments {
        prob: count[i] as f64 / n as f64,
        mean: mean[i],
        var: if count[i] > 1 { sq[i] / (count[i] - 1) as f64 } else { 0.0 },
        count: Some(count[i]),
    };
    Ok(RegionStats {
        bins: *bins,
        minus: moments(0),
        middle: moments(1),
        plus: moments(2),
        mean_x: total_mean,
        var_x: total_var,
        sample_count: Some(n),
    })
}

pub(crate) fn index_of(region: Region) -> usize {
    match region {
        Region::Minus => 0,
        Region::Middle => 1,
        Region::Plus => 2,
    }
}

/// `(mu+ + S/2)^2 + (mu- - S/2)^2 + S^2/2 + var+ + var-`, with the region
/// means taken relative to the bin center.
pub fn delta(stats: &RegionStats, distance: f64) -> f64 {
    let half = 0.5 * distance;
    (stats.plus.mean + half).powi(2)
        + (stats.minus.mean - half).powi(2)
        + 0.5 * distance * distance
        + stats.plus.var
        + stats.minus.var
}

/// Outcome of evaluating the witness at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub distance: f64,
    pub center: f64,
    pub delta: f64,
    pub ave_var_x: f64,
    pub prob_middle: f64,
    pub var_p: f64,
    pub lhs: f64,
    /// `lhs < 1`: a superposition across `distance` is certified.
    pub violated: bool,
    pub uncertainty_lhs: Option<f64>,
}

impl WitnessResult {
    /// Distance of the left-hand side below the bound; positive when violated.
    pub fn margin(&self) -> f64 {
        1.0 - self.lhs
    }
}

/// `(P+ var+ + P- var- + P0 * delta) * var_p`.
pub fn witness_lhs(stats: &RegionStats, var_p: f64) -> Result<WitnessResult> {
    if !(var_p.is_finite() && var_p > 0.0) {
        return Err(Error::param("var_p", format!("must be positive, got {var_p}")));
    }
    let distance = stats.distance();
    let delta = delta(stats, distance);
    let ave_var_x = stats.ave_var_x();
    let lhs = (ave_var_x + stats.middle.prob * delta) * var_p;
    Ok(WitnessResult {
        distance,
        center: stats.bins.center,
        delta,
        ave_var_x,
        prob_middle: stats.middle.prob,
        var_p,
        lhs,
        violated: lhs < 1.0,
        uncertainty_lhs: None,
    })
}

/// Witness of a Gaussian state at distance `distance`.
pub fn witness_analytic(
    state: &GaussianStateSpec,
    distance: f64,
    center: CenterPolicy,
) -> Result<WitnessResult> {
    let bins = BinningSpec::new(distance, center.resolve(state.mean_x))?;
    let stats = region_stats_analytic(state, &bins)?;
    witness_lhs(&stats, state.var_p)
}

/// Unbiased sample variance.
pub fn sample_variance(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::EmptySeries);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    Ok(samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Witness from `x` data binned at `distance` and the variance of `p` data.
pub fn witness_empirical(
    x: &[f64],
    p: &[f64],
    distance: f64,
    center: CenterPolicy,
) -> Result<WitnessResult> {
    if x.is_empty() || p.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let bins = BinningSpec::new(distance, center.resolve(mean))?;
    let stats = region_stats_empirical(x, &bins)?;
    witness_lhs(&stats, sample_variance(p)?)
}
