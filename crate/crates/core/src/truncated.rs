//! Moments of a normal density restricted to an interval.
//!
//! The interval is first standardized and reflected so that most of it lies
//! on the positive axis. Three evaluation routes are then used:
//!
//! * narrow finite intervals: 16-point Gauss-Legendre quadrature of the
//!   density relative to its peak on the interval, which keeps the variance
//!   free of cancellation;
//! * intervals entirely in the upper half: Mills-ratio form, where every
//!   quantity is scaled by `phi(a)` so nothing underflows in the far tail;
//! * intervals straddling the origin: plain error-function differences.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regions whose normal mass falls below this are reported as empty.
pub const MIN_MASS: f64 = 1e-300;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Mass, mean and variance of a truncated normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedMoments {
    pub prob: f64,
    pub mean: f64,
    pub var: f64,
}

/// Standard normal density.
pub fn std_normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t - LN_SQRT_2PI).exp()
}

/// Upper tail probability `P(Z > t)`.
pub fn std_normal_sf(t: f64) -> f64 {
    0.5 * libm::erfc(t * FRAC_1_SQRT_2)
}

/// Mills ratio `P(Z > t) / phi(t)` for `t >= 0`.
pub fn mills_ratio(t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t < 10.0 {
        let x = t * FRAC_1_SQRT_2;
        (PI / 2.0).sqrt() * (x * x).exp() * libm::erfc(x)
    } else {
        // Laplace continued fraction, evaluated backwards.
        let mut tail = t;
        for k in (1..=60).rev() {
            tail = t + k as f64 / tail;
        }
        1.0 / tail
    }
}

fn gauss_legendre_16() -> &'static [(f64, f64); 16] {
    static RULE: OnceLock<[(f64, f64); 16]> = OnceLock::new();
    RULE.get_or_init(|| {
        const N: usize = 16;
        let mut rule = [(0.0, 0.0); N];
        for (i, slot) in rule.iter_mut().enumerate() {
            let mut x = (PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut deriv = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=N {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                deriv = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / deriv;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * deriv * deriv));
        }
        rule
    })
}

/// Moments of the standard normal restricted to `[a, b]`, plus the natural
/// log of the mass.
#[derive(Debug, Clone, Copy)]
struct Standardized {
    log_mass: f64,
    mean: f64,
    var: f64,
}

fn narrow(a: f64, b: f64) -> Standardized {
    let peak = if a > 0.0 {
        a
    } else if b < 0.0 {
        b
    } else {
        0.0
    };
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes = [(0.0, 0.0); 16];
    let mut total = 0.0;
    let mut first = 0.0;
    for (slot, &(xi, w)) in nodes.iter_mut().zip(gauss_legendre_16()) {
        let t = mid + half * xi;
        let f = w * (-0.5 * (t - peak) * (t + peak)).exp();
        *slot = (t, f);
        total += f;
        first += f * (t - mid);
    }
    let offset = first / total;
    let var = nodes
        .iter()
        .map(|&(t, f)| f * (t - mid - offset).powi(2))
        .sum::<f64>()
        / total;
    Standardized {
        log_mass: -0.5 * peak * peak - LN_SQRT_2PI + (half * total).ln(),
        mean: mid + offset,
        var,
    }
}

fn upper_tail(a: f64, b: f64) -> Standardized {
    // Everything is scaled by phi(a); `ratio` is phi(b) / phi(a).
    let (ratio, b_ratio, mills_b) = if b.is_finite() {
        let r = (-0.5 * (b - a) * (b + a)).exp();
        (r, b * r, r * mills_ratio(b))
    } else {
        (0.0, 0.0, 0.0)
    };
    let den = mills_ratio(a) - mills_b;
    let mean = (1.0 - ratio) / den;
    let second = 1.0 + (a - b_ratio) / den;
    Standardized {
        log_mass: -0.5 * a * a - LN_SQRT_2PI + den.ln(),
        mean,
        var: (second - mean * mean).max(0.0),
    }
}

fn straddle(a: f64, b: f64) -> Standardized {
    if a == f64::NEG_INFINITY && b == f64::INFINITY {
        return Standardized {
            log_mass: 0.0,
            mean: 0.0,
            var: 1.0,
        };
    }
    let mass = 0.5 * (libm::erf(b * FRAC_1_SQRT_2) - libm::erf(a * FRAC_1_SQRT_2));
    let (pa, apa) = if a.is_finite() {
        let p = std_normal_pdf(a);
        (p, a * p)
    } else {
        (0.0, 0.0)
    };
    let (pb, bpb) = if b.is_finite() {
        let p = std_normal_pdf(b);
        (p, b * p)
    } else {
        (0.0, 0.0)
    };
    let mean = (pa - pb) / mass;
    let second = 1.0 + (apa - bpb) / mass;
    Standardized {
        log_mass: mass.ln(),
        mean,
        var: (second - mean * mean).max(0.0),
    }
}

fn standardized(a: f64, b: f64) -> Standardized {
    // Reflect so that the interval leans towards +inf.
    let reflect = a + b < 0.0;
    let (a, b) = if reflect { (-b, -a) } else { (a, b) };
    let width = b - a;
    let mut out = if width.is_finite() && width * (1.0 + a.abs().max(b.abs())) <= 8.0 {
        narrow(a, b)
    } else if a >= 0.0 {
        upper_tail(a, b)
    } else {
        straddle(a, b)
    };
    if reflect {
        out.mean = -out.mean;
    }
    out
}

/// Mass, mean and variance of `N(mean, var)` restricted to `[lo, hi]`.
///
/// `lo` may be `-inf` and `hi` may be `+inf`. Returns
/// [`Error::NegligibleMass`] when the interval carries less than
/// [`MIN_MASS`] of probability.
pub fn truncated_moments(mean: f64, var: f64, lo: f64, hi: f64) -> Result<TruncatedMoments> {
    if !(var.is_finite() && var > 0.0) {
        return Err(Error::param("var", format!("must be positive, got {var}")));
    }
    if !mean.is_finite() {
        return Err(Error::param("mean", "must be finite"));
    }
    if lo.is_nan() || hi.is_nan() || lo >= hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
        return Err(Error::DegenerateInterval { lo, hi });
    }
    let sigma = var.sqrt();
    let z = standardized((lo - mean) / sigma, (hi - mean) / sigma);
    if z.log_mass.is_nan() || z.log_mass < MIN_MASS.ln() {
        return Err(Error::NegligibleMass { lo, hi });
    }
    Ok(TruncatedMoments {
        prob: z.log_mass.exp().min(1.0),
        mean: mean + sigma * z.mean,
        var: var * z.var,
    })
}
