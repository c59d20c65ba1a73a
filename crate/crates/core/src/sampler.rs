//! Seeded Monte Carlo stand-in for the homodyne acquisition chain.
//!
//! Samples are generated in chunks of [`CHUNK`]; chunk `k` draws from the
//! ChaCha8 stream `(seed, k)`. Output is the concatenation in chunk order,
//! so serial and parallel generation are bit-identical.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::{Quadrature, QuadratureSeries};
use crate::error::{Error, Result};
use crate::snu::GaussianStateSpec;

pub const CHUNK: usize = 1 << 16;

/// Sideband frequency recorded in simulated metadata (Hz).
pub const DEFAULT_SIDEBAND_HZ: f64 = 1.0e6;
/// Resolution bandwidth recorded in simulated metadata (Hz).
pub const DEFAULT_RBW_HZ: f64 = 3.0e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionSpec {
    pub state: GaussianStateSpec,
    pub quadrature: Quadrature,
    pub count: usize,
    pub seed: u64,
    /// Total detection efficiency, applied as a beam-splitter loss.
    pub efficiency: f64,
}

impl AcquisitionSpec {
    pub fn new(state: GaussianStateSpec, quadrature: Quadrature, count: usize, seed: u64) -> Self {
        AcquisitionSpec {
            state,
            quadrature,
            count,
            seed,
            efficiency: 1.0,
        }
    }

    pub fn with_efficiency(mut self, efficiency: f64) -> Self {
        self.efficiency = efficiency;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.state.validate()?;
        if self.count == 0 {
            return Err(Error::param("count", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::param(
                "efficiency",
                format!("must lie in [0, 1], got {}", self.efficiency),
            ));
        }
        Ok(())
    }

    /// The state as seen after detection losses.
    pub fn detected_state(&self) -> Result<GaussianStateSpec> {
        self.state.apply_loss(self.efficiency)
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn fill_normal(out: &mut [f64], seed: u64, mean: f64, sigma: f64, exec: Execution) {
    let fill = |(k, chunk): (usize, &mut [f64])| {
        let mut rng = chunk_rng(seed, k);
        for v in chunk {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = mean + sigma * z;
        }
    };
    match exec {
        Execution::Serial => out.chunks_mut(CHUNK).enumerate().for_each(fill),
        Execution::Parallel => out.par_chunks_mut(CHUNK).enumerate().for_each(fill),
    }
}

pub fn sample_quadrature(spec: &AcquisitionSpec) -> Result<QuadratureSeries> {
    sample_quadrature_with(spec, Execution::Parallel)
}

pub fn sample_quadrature_with(spec: &AcquisitionSpec, exec: Execution) -> Result<QuadratureSeries> {
    spec.validate()?;
    let state = spec.detected_state()?;
    let (mean, var) = match spec.quadrature {
        Quadrature::X => (state.mean_x, state.var_x),
        Quadrature::P => (state.mean_p, state.var_p),
    };
    let mut samples = vec![0.0; spec.count];
    fill_normal(&mut samples, spec.seed, mean, var.sqrt(), exec);
    let series = QuadratureSeries::new(samples, spec.quadrature)?
        .with_meta("source", "simulation")
        .with_meta("seed", spec.seed)
        .with_meta("efficiency", spec.efficiency)
        .with_meta("state_mean_x", spec.state.mean_x)
        .with_meta("state_mean_p", spec.state.mean_p)
        .with_meta("state_var_x", spec.state.var_x)
        .with_meta("state_var_p", spec.state.var_p)
        .with_meta("sideband_hz", DEFAULT_SIDEBAND_HZ)
        .with_meta("rbw_hz", DEFAULT_RBW_HZ);
    Ok(series)
}

/// Paired `(x, p)` draws from the product of the two marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSamples {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

pub fn sample_joint(state: &GaussianStateSpec, count: usize, seed: u64) -> Result<JointSamples> {
    sample_joint_with(state, count, seed, Execution::Parallel)
}

pub fn sample_joint_with(state: &GaussianStateSpec, count: usize, seed: u64, exec: Execution) -> Result<JointSamples> {
    state.validate()?;
    if count == 0 {
        return Err(Error::param("count", "must be at least 1"));
    }
    let (sx, sp) = (state.var_x.sqrt(), state.var_p.sqrt());
    let mut pairs = vec![(0.0, 0.0); count];
    let fill = |(k, chunk): (usize, &mut [(f64, f64)])| {
        let mut rng = chunk_rng(seed, k);
        for pair in chunk {
            let zx: f64 = StandardNormal.sample(&mut rng);
            let zp: f64 = StandardNormal.sample(&mut rng);
            *pair = (state.mean_x + sx * zx, state.mean_p + sp * zp);
        }
    };
    match exec {
        Execution::Serial => pairs.chunks_mut(CHUNK).enumerate().for_each(fill),
        Execution::Parallel => pairs.par_chunks_mut(CHUNK).enumerate().for_each(fill),
    }
    let (x, p) = pairs.into_iter().unzip();
    Ok(JointSamples { x, p })
}
