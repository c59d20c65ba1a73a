//! Largest distance `S` at which the witness is still violated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snu::GaussianStateSpec;

use super::bootstrap::{bootstrap_uncertainty, BootstrapEstimate, BootstrapOptions, BootstrapTarget};
use super::sorted::{PrefixStats, SortedSample};
use super::{region_stats_analytic, sample_variance, witness_lhs, BinningSpec, CenterPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmaxOptions {
    /// Absolute tolerance on `S`.
    pub tolerance: f64,
    /// Bracket growth factor, starting from `[0, sigma_x]`.
    pub growth: f64,
    /// Search cap in units of `sigma_x`.
    pub cap_sigmas: f64,
    pub center: CenterPolicy,
}

impl Default for SmaxOptions {
    fn default() -> Self {
        SmaxOptions {
            tolerance: 1e-6,
            growth: 2.0,
            cap_sigmas: 20.0,
            center: CenterPolicy::Mean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmaxStatus {
    /// `lhs` crosses 1 at `s_max`.
    Crossing,
    /// `lhs(0) >= 1`: no distance can be certified, `s_max` is 0.
    NoViolationAtZero,
    /// The data ran out of outer-region samples before `lhs` reached 1;
    /// `s_max` is the last distance the data could resolve.
    CeilingLimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmaxResult {
    pub s_max: f64,
    pub status: SmaxStatus,
    pub lhs_at_zero: f64,
    /// Final bracket `[violated, not violated]`.
    pub bracket: (f64, f64),
    /// Upper end of the search range.
    pub ceiling: f64,
    pub evaluations: usize,
}

/// Bracketed bisection for the crossing of `lhs(S) = 1`.
///
/// The bracket starts at `[0, initial]` and grows by `opts.growth` until
/// `lhs >= 1`. No monotonicity is assumed below the first bracket point.
fn search<F>(mut lhs: F, initial: f64, ceiling: f64, data_limited: bool, opts: &SmaxOptions) -> Result<SmaxResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(opts.tolerance > 0.0 && opts.growth > 1.0 && opts.cap_sigmas > 0.0) {
        return Err(Error::param("smax options", "tolerance > 0, growth > 1 and cap > 0 required"));
    }
    let mut evaluations = 1;
    let lhs_at_zero = lhs(0.0)?;
    if lhs_at_zero >= 1.0 {
        return Ok(SmaxResult {
            s_max: 0.0,
            status: SmaxStatus::NoViolationAtZero,
            lhs_at_zero,
            bracket: (0.0, 0.0),
            ceiling,
            evaluations,
        });
    }
    let mut lo = 0.0;
    let mut hi = initial.min(ceiling);
    loop {
        evaluations += 1;
        if hi > 0.0 && lhs(hi)? >= 1.0 {
            break;
        }
        lo = hi;
        if hi >= ceiling {
            if data_limited {
                return Ok(SmaxResult {
                    s_max: ceiling,
                    status: SmaxStatus::CeilingLimited,
                    lhs_at_zero,
                    bracket: (ceiling, ceiling),
                    ceiling,
                    evaluations,
                });
            }
            return Err(Error::BracketNotFound { cap: ceiling });
        }
        hi = (hi * opts.growth).min(ceiling);
    }
    while hi - lo > opts.tolerance {
        let mid = 0.5 * (lo + hi);
        evaluations += 1;
        if lhs(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SmaxResult {
        s_max: 0.5 * (lo + hi),
        status: SmaxStatus::Crossing,
        lhs_at_zero,
        bracket: (lo, hi),
        ceiling,
        evaluations,
    })
}

/// `S_max` of a Gaussian state, bins centered on the mean of `x`.
pub fn smax_analytic(state: &GaussianStateSpec) -> Result<SmaxResult> {
    smax_analytic_with(state, &SmaxOptions::default())
}

pub fn smax_analytic_with(state: &GaussianStateSpec, opts: &SmaxOptions) -> Result<SmaxResult> {
    state.validate()?;
    let sigma = state.sigma_x();
    let center = opts.center.resolve(state.mean_x);
    search(
        |s| {
            let bins = BinningSpec::new(s, center)?;
            let stats = region_stats_analytic(state, &bins)?;
            Ok(witness_lhs(&stats, state.var_p)?.lhs)
        },
        sigma,
        opts.cap_sigmas * sigma,
        false,
        opts,
    )
}

/// Search on (possibly bootstrap-weighted) `x` data with a given `var_p`.
pub(crate) fn smax_on_prefix(prefix: &PrefixStats<'_>, var_p: f64, opts: &SmaxOptions) -> Result<SmaxResult> {
    let sigma = prefix.variance().sqrt();
    let center = opts.center.resolve(prefix.mean());
    let cap = opts.cap_sigmas * sigma;
    let data_ceiling = prefix.outer_ceiling(center);
    let (ceiling, data_limited) = if data_ceiling < cap {
        (data_ceiling, true)
    } else {
        (cap, false)
    };
    search(
        |s| {
            let bins = BinningSpec::new(s, center)?;
            Ok(witness_lhs(&prefix.region_stats(&bins)?, var_p)?.lhs)
        },
        sigma,
        ceiling,
        data_limited,
        opts,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmaxEmpirical {
    pub result: SmaxResult,
    pub center: f64,
    pub var_p: f64,
    pub uncertainty: Option<BootstrapEstimate>,
}

/// `S_max` from measured `x` and `p` runs. Every trial `S` re-bins the same
/// `x` samples. With `bootstrap` set, the standard deviation of `S_max` over
/// resamples is attached.
pub fn smax_empirical(
    x: &[f64],
    p: &[f64],
    opts: &SmaxOptions,
    bootstrap: Option<&BootstrapOptions>,
) -> Result<SmaxEmpirical> {
    if x.is_empty() || p.is_empty() {
        return Err(Error::EmptySeries);
    }
    let sorted = SortedSample::new(x)?;
    let prefix = sorted.prefix();
    let var_p = sample_variance(p)?;
    let result = smax_on_prefix(&prefix, var_p, opts)?;
    let uncertainty = match bootstrap {
        Some(b) => {
            let b = BootstrapOptions {
                target: BootstrapTarget::Smax,
                center: opts.center,
                smax: *opts,
                ..b.clone()
            };
            Some(bootstrap_uncertainty(x, p, result.s_max, &b)?)
        }
        None => None,
    };
    Ok(SmaxEmpirical {
        result,
        center: opts.center.resolve(prefix.mean()),
        var_p,
        uncertainty,
    })
}
