//! Simulation-only check of the no-coherence variance decomposition.
//!
//! Without coherence between the regions, the variance of `p` over the whole
//! state is at least the probability-weighted sum of the `p` variances within
//! each `x` region. Evaluating it needs `p` conditioned on the `x` region of
//! the same shot, which only joint phase-space samples provide.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Region, Result};

use super::{index_of, BinningSpec, MIN_REGION_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalVariance {
    pub prob: f64,
    pub var_p: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoCoherenceDiagnostic {
    /// Variance of all `p` samples.
    pub var_p_mixed: f64,
    /// `sum_i P_i var_i(p)`.
    pub weighted_var_p: f64,
    /// `var_p_mixed - weighted_var_p`; nonnegative up to sampling noise.
    pub slack: f64,
    /// Standard error of `slack` when `p` does not depend on the region.
    pub standard_error: f64,
    pub regions: [ConditionalVariance; 3],
}

impl NoCoherenceDiagnostic {
    /// Slack in units of its standard error.
    pub fn z_score(&self) -> f64 {
        self.slack / self.standard_error
    }
}

/// `x[k]` and `p[k]` must come from the same shot.
pub fn no_coherence_bound(x: &[f64], p: &[f64], bins: &BinningSpec) -> Result<NoCoherenceDiagnostic> {
    if x.len() != p.len() {
        return Err(Error::param("joint samples", "x and p must be paired"));
    }
    if x.len() < 2 {
        return Err(Error::EmptySeries);
    }
    let p_mean = p.iter().sum::<f64>() / p.len() as f64;
    let mut count = [0usize; 3];
    let mut sum = [0.0f64; 3];
    for (&xi, &pi) in x.iter().zip(p) {
        let k = index_of(bins.region_of(xi));
        count[k] += 1;
        sum[k] += pi - p_mean;
    }
    for region in Region::ALL {
        let n = count[index_of(region)];
        let outer = region != Region::Middle;
        if n < MIN_REGION_SAMPLES && (outer || n > 0) {
            return Err(Error::InsufficientRegionSamples {
                region,
                count: n,
                required: MIN_REGION_SAMPLES,
            });
        }
    }
    let mean: [f64; 3] = std::array::from_fn(|k| if count[k] > 0 { sum[k] / count[k] as f64 } else { 0.0 });
    let mut sq = [0.0f64; 3];
    let mut total_sq = 0.0;
    for (&xi, &pi) in x.iter().zip(p) {
        let k = index_of(bins.region_of(xi));
        let d = pi - p_mean;
        sq[k] += (d - mean[k]).powi(2);
        total_sq += d * d;
    }
    let n = x.len() as f64;
    let var_p_mixed = total_sq / (n - 1.0);
    let regions: [ConditionalVariance; 3] = std::array::from_fn(|k| ConditionalVariance {
        prob: count[k] as f64 / n,
        var_p: if count[k] > 1 { sq[k] / (count[k] - 1) as f64 } else { 0.0 },
        count: count[k],
    });
    let weighted_var_p: f64 = regions.iter().map(|r| r.prob * r.var_p).sum();
    // Under independence the slack is var_p * (chi2_{k-1} - (k-1)) / N
    // to leading order, with k the number of occupied regions.
    let occupied = count.iter().filter(|&&c| c > 0).count() as f64;
    let standard_error = var_p_mixed * (2.0 * (occupied - 1.0)).sqrt() / n;
    Ok(NoCoherenceDiagnostic {
        var_p_mixed,
        weighted_var_p,
        slack: var_p_mixed - weighted_var_p,
        standard_error,
        regions,
    })
}
