//! Nonparametric bootstrap for empirical witness quantities.
//!
//! The `x` and `p` runs are resampled independently, with replacement, since
//! they come from separate acquisitions. Resample `i` draws from a ChaCha8
//! stream keyed by `(seed, i)`, so the result does not depend on how the
//! resamples are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::smax::{smax_on_prefix, SmaxOptions};
use super::sorted::SortedSample;
use super::{witness_lhs, BinningSpec, CenterPolicy};

pub const MIN_RESAMPLES: usize = 100;
pub const DEFAULT_RESAMPLES: usize = 1000;

/// Consecutive degenerate draws tolerated for a single resample.
const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapTarget {
    /// Witness left-hand side at the given distance.
    Lhs,
    /// `S_max` of each resample; the distance argument is ignored.
    Smax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub resamples: usize,
    pub seed: u64,
    pub target: BootstrapTarget,
    pub center: CenterPolicy,
    pub smax: SmaxOptions,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            resamples: DEFAULT_RESAMPLES,
            seed: 0,
            target: BootstrapTarget::Lhs,
            center: CenterPolicy::Mean,
            smax: SmaxOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapEstimate {
    pub target: BootstrapTarget,
    /// Standard deviation over resamples.
    pub std_dev: f64,
    pub mean: f64,
    pub resamples: usize,
    pub seed: u64,
    /// Resamples that left an outer region with fewer than two samples and
    /// were drawn again.
    pub redrawn: usize,
    /// More than 1% of the draws were redrawn.
    pub excessive_redraws: bool,
}

struct Scratch {
    counts: Vec<u32>,
    cumulative: Vec<[f64; 3]>,
}

fn draw_counts(rng: &mut ChaCha8Rng, counts: &mut [u32]) {
    counts.fill(0);
    let n = counts.len() as u32;
    for _ in 0..n {
        counts[rng.random_range(0..n) as usize] += 1;
    }
}

fn resampled_variance(rng: &mut ChaCha8Rng, centered: &[f64]) -> f64 {
    let n = centered.len() as u32;
    let (mut s, mut q) = (0.0, 0.0);
    for _ in 0..n {
        let v = centered[rng.random_range(0..n) as usize];
        s += v;
        q += v * v;
    }
    let nf = n as f64;
    (q - s * s / nf) / (nf - 1.0)
}

/// Bootstrap standard deviation of the witness `lhs` at `distance`, or of
/// `S_max` when `opts.target` is [`BootstrapTarget::Smax`].
pub fn bootstrap_uncertainty(
    x: &[f64],
    p: &[f64],
    distance: f64,
    opts: &BootstrapOptions,
) -> Result<BootstrapEstimate> {
    if opts.resamples < MIN_RESAMPLES {
        return Err(Error::param(
            "resamples",
            format!("at least {MIN_RESAMPLES} required, got {}", opts.resamples),
        ));
    }
    if x.len() < 2 || p.len() < 2 {
        return Err(Error::EmptySeries);
    }
    if x.len() > u32::MAX as usize || p.len() > u32::MAX as usize {
        return Err(Error::param("samples", "series longer than 2^32 - 1"));
    }
    if opts.target == BootstrapTarget::Lhs {
        BinningSpec::new(distance, 0.0)?;
    }
    let sorted = SortedSample::new(x)?;
    let p_mean = p.iter().sum::<f64>() / p.len() as f64;
    let p_centered: Vec<f64> = p.iter().map(|v| v - p_mean).collect();

    let one = |scratch: &mut Scratch, index: usize| -> Result<(f64, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(index as u64);
        let mut redrawn = 0;
        loop {
            draw_counts(&mut rng, &mut scratch.counts);
            let var_p = resampled_variance(&mut rng, &p_centered);
            let prefix = sorted.prefix_weighted_in(&scratch.counts, std::mem::take(&mut scratch.cumulative));
            let value = match opts.target {
                BootstrapTarget::Lhs => {
                    let bins = BinningSpec::new(distance, opts.center.resolve(prefix.mean()))?;
                    prefix
                        .region_stats(&bins)
                        .and_then(|stats| witness_lhs(&stats, var_p))
                        .map(|w| w.lhs)
                }
                BootstrapTarget::Smax => {
                    let smax = SmaxOptions {
                        center: opts.center,
                        ..opts.smax
                    };
                    smax_on_prefix(&prefix, var_p, &smax).map(|r| r.s_max)
                }
            };
            scratch.cumulative = prefix.into_buffer();
            match value {
                Ok(v) => return Ok((v, redrawn)),
                Err(e @ Error::InsufficientRegionSamples { .. }) => {
                    redrawn += 1;
                    if redrawn > MAX_REDRAWS {
                        return Err(e);
                    }
                }
                Err(e) => return Err(e),
            }
        }
    };

    let draws: Vec<(f64, usize)> = (0..opts.resamples)
        .into_par_iter()
        .map_init(
            || Scratch {
                counts: vec![0; sorted.len()],
                cumulative: Vec::new(),
            },
            one,
        )
        .collect::<Result<_>>()?;

    let n = draws.len() as f64;
    let mean = draws.iter().map(|d| d.0).sum::<f64>() / n;
    let var = draws.iter().map(|d| (d.0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let redrawn: usize = draws.iter().map(|d| d.1).sum();
    Ok(BootstrapEstimate {
        target: opts.target,
        std_dev: var.sqrt(),
        mean,
        resamples: opts.resamples,
        seed: opts.seed,
        redrawn,
        excessive_redraws: redrawn * 100 > opts.resamples + redrawn,
    })
}
