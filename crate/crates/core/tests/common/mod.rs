//! Reference witness built only from adaptive Simpson quadrature of the
//! Gaussian density and plain bisection. Shares no code with the library.

#![allow(dead_code)]

use std::f64::consts::PI;

pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Probability, mean and variance of N(mean, var) restricted to [lo, hi].
pub fn region_moments(mean: f64, var: f64, lo: f64, hi: f64) -> (f64, f64, f64) {
    let sd = var.sqrt();
    let lo = lo.max(mean - 40.0 * sd);
    let hi = hi.min(mean + 40.0 * sd);
    if hi <= lo {
        return (0.0, 0.0, 0.0);
    }
    // scale by the density at the point of the interval nearest the mean so
    // that tolerances are relative even deep in a tail
    let nearest = mean.clamp(lo, hi);
    let peak = -(nearest - mean).powi(2) / (2.0 * var);
    let scaled = |x: f64| (-(x - mean).powi(2) / (2.0 * var) - peak).exp();
    let mut cuts = vec![lo, hi];
    for c in [nearest - sd, nearest, nearest + sd, nearest - 0.1 * sd, nearest + 0.1 * sd] {
        if c > lo && c < hi {
            cuts.push(c);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let integrate = |g: &dyn Fn(f64) -> f64| {
        cuts.windows(2)
            .map(|w| adaptive_simpson(&g, w[0], w[1], 1e-14 * sd))
            .sum::<f64>()
    };
    let mass = integrate(&|x| scaled(x));
    let mu = nearest + integrate(&|x| (x - nearest) * scaled(x)) / mass;
    let v = integrate(&|x| (x - mu).powi(2) * scaled(x)) / mass;
    let p = mass * peak.exp() / (2.0 * PI * var).sqrt();
    (p, mu, v)
}

/// Witness left-hand side for a Gaussian state, bins centered on the mean.
pub fn lhs(mean_x: f64, var_x: f64, var_p: f64, s: f64) -> f64 {
    let half = 0.5 * s;
    let (pm, mm, vm) = region_moments(mean_x, var_x, f64::NEG_INFINITY, mean_x - half);
    let (p0, _, _) = region_moments(mean_x, var_x, mean_x - half, mean_x + half);
    let (pp, mp, vp) = region_moments(mean_x, var_x, mean_x + half, f64::INFINITY);
    let (mm, mp) = (mm - mean_x, mp - mean_x);
    let delta = (mp + half).powi(2) + (mm - half).powi(2) + s * s / 2.0 + vp + vm;
    (pp * vp + pm * vm + p0 * delta) * var_p
}

/// Root of lhs(S) = 1 by bisection, starting from a bracket where lhs < 1
/// at the left end.
pub fn smax(var_x: f64, var_p: f64) -> f64 {
    let f = |s: f64| lhs(0.0, var_x, var_p, s) - 1.0;
    let (mut a, mut b) = (0.0, var_x.sqrt());
    assert!(f(a) < 0.0, "no violation at S = 0");
    while f(b) < 0.0 {
        a = b;
        b *= 2.0;
    }
    while b - a > 1e-11 {
        let m = 0.5 * (a + b);
        if f(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `(var_x, var_p)` of a state given as squeezing (dB, negative) and purity.
pub fn squeezed(db: f64, purity: f64) -> (f64, f64) {
    let var_p = 10f64.powf(db / 10.0);
    (1.0 / (var_p * purity * purity), var_p)
}
