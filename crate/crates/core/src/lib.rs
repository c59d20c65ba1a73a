//! Witness for generalized macroscopic superpositions in Gaussian
//! quadrature statistics.
//!
//! One quadrature (`x`) is binned into three regions separated by a gap `S`.
//! From the region statistics of `x` and the variance of the conjugate
//! quadrature `p`, the witness
//!
//! ```text
//! (P+ var+ + P- var- + P0 * delta) * var_p >= 1
//! delta = (mu+ + S/2)^2 + (mu- - S/2)^2 + S^2/2 + var+ + var-
//! ```
//!
//! holds for every state without coherence between the outer regions. A value
//! below one certifies a superposition of components separated by `S`.
//! Everything is in shot-noise units: vacuum variance 1, uncertainty bound 1.

pub mod dataio;
pub mod error;
pub mod sampler;
pub mod snu;
pub mod truncated;
pub mod witness;

pub use dataio::{Quadrature, QuadratureSeries, RunPair};
pub use error::{Error, Region, Result};
pub use sampler::{sample_joint, sample_quadrature, AcquisitionSpec};
pub use snu::{GaussianStateSpec, SqueezingPuritySpec};
pub use truncated::{truncated_moments, TruncatedMoments};
pub use witness::{
    region_stats_analytic, region_stats_empirical, smax_analytic, smax_empirical, witness_lhs,
    BinningSpec, CenterPolicy, RegionStats, WitnessResult,
};
