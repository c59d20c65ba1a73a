//! Shot-noise units and single-mode Gaussian state parameterization.
//!
//! All variances are expressed in shot-noise units (SNU): the vacuum has
//! `var_x = var_p = 1` and the uncertainty relation reads
//! `var_x * var_p >= 1`. With this convention the witness bound is exactly 1.
//! Quadratures are assumed to be the principal axes of the state, so the
//! cross-covariance between `x` and `p` is zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the uncertainty product before a state is rejected.
pub const HEISENBERG_TOL: f64 = 1e-9;

/// Converts a noise level in dB relative to shot noise into a variance in SNU.
///
/// Squeezing is negative dB, anti-squeezing positive.
pub fn db_to_variance(db: f64) -> Result<f64> {
    if !db.is_finite() {
        return Err(Error::param("db", format!("must be finite, got {db}")));
    }
    Ok(10f64.powf(db / 10.0))
}

pub fn variance_to_db(var: f64) -> f64 {
    10.0 * var.log10()
}

/// A single-mode Gaussian state described by its quadrature means and
/// variances, in SNU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianStateSpec {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
}

impl GaussianStateSpec {
    pub const VACUUM: GaussianStateSpec = GaussianStateSpec {
        mean_x: 0.0,
        mean_p: 0.0,
        var_x: 1.0,
        var_p: 1.0,
    };

    pub fn new(mean_x: f64, mean_p: f64, var_x: f64, var_p: f64) -> Result<Self> {
        let state = GaussianStateSpec {
            mean_x,
            mean_p,
            var_x,
            var_p,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn vacuum() -> Self {
        Self::VACUUM
    }

    /// Coherent state with the given quadrature displacement.
    pub fn coherent(mean_x: f64, mean_p: f64) -> Result<Self> {
        Self::new(mean_x, mean_p, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_x.is_finite() && self.mean_p.is_finite()) {
            return Err(Error::InvalidState("means must be finite".into()));
        }
        if !(self.var_x.is_finite() && self.var_x > 0.0) {
            return Err(Error::InvalidState(format!(
                "var_x must be positive, got {}",
                self.var_x
            )));
        }
        if !(self.var_p.is_finite() && self.var_p > 0.0) {
            return Err(Error::InvalidState(format!(
                "var_p must be positive, got {}",
                self.var_p
            )));
        }
        let product = self.var_x * self.var_p;
        if product < 1.0 - HEISENBERG_TOL {
            return Err(Error::InvalidState(format!(
                "var_x * var_p = {product} violates the uncertainty bound 1"
            )));
        }
        Ok(())
    }

    /// Gaussian purity `1 / sqrt(var_x * var_p)`.
    pub fn purity(&self) -> f64 {
        1.0 / (self.var_x * self.var_p).sqrt()
    }

    pub fn sigma_x(&self) -> f64 {
        self.var_x.sqrt()
    }

    /// Mixes the state with vacuum on a beam splitter of transmissivity `eta`.
    pub fn apply_loss(&self, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::param("eta", format!("must lie in [0, 1], got {eta}")));
        }
        let amp = eta.sqrt();
        let state = GaussianStateSpec {
            mean_x: amp * self.mean_x,
            mean_p: amp * self.mean_p,
            var_x: eta * self.var_x + (1.0 - eta),
            var_p: eta * self.var_p + (1.0 - eta),
        };
        state.validate()?;
        Ok(state)
    }

    pub fn displaced(&self, mean_x: f64, mean_p: f64) -> Result<Self> {
        Self::new(mean_x, mean_p, self.var_x, self.var_p)
    }
}

/// Free function form of [`GaussianStateSpec::purity`].
pub fn purity(state: &GaussianStateSpec) -> f64 {
    state.purity()
}

pub fn apply_loss(state: &GaussianStateSpec, eta: f64) -> Result<GaussianStateSpec> {
    state.apply_loss(eta)
}

/// Squeezed state given by its squeezing level and purity; the axes of the
/// contour plot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingPuritySpec {
    /// Squeezed-quadrature (`p`) noise in dB relative to shot noise, `<= 0`.
    pub squeezing_db: f64,
    pub purity: f64,
}

impl SqueezingPuritySpec {
    pub fn new(squeezing_db: f64, purity: f64) -> Result<Self> {
        let spec = SqueezingPuritySpec {
            squeezing_db,
            purity,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.squeezing_db.is_finite() || self.squeezing_db > 0.0 {
            return Err(Error::param(
                "squeezing_db",
                format!("must be finite and <= 0, got {}", self.squeezing_db),
            ));
        }
        if !(self.purity > 0.0 && self.purity <= 1.0) {
            return Err(Error::param(
                "purity",
                format!("must lie in (0, 1], got {}", self.purity),
            ));
        }
        Ok(())
    }

    /// Zero-mean state with `var_p = 10^(dB/10)` and
    /// `var_x = 1 / (var_p * purity^2)`.
    pub fn to_state(&self) -> Result<GaussianStateSpec> {
        self.validate()?;
        let var_p = db_to_variance(self.squeezing_db)?;
        let var_x = 1.0 / (var_p * self.purity * self.purity);
        GaussianStateSpec::new(0.0, 0.0, var_x, var_p)
    }
}

pub fn from_squeezing_purity(spec: &SqueezingPuritySpec) -> Result<GaussianStateSpec> {
    spec.to_state()
}
