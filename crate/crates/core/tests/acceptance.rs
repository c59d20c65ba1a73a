//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use macrocoherence::dataio::{read_series, write_series, Encoding};
use macrocoherence::sampler::{sample_joint, sample_quadrature_with, AcquisitionSpec, Execution};
use macrocoherence::witness::{
    contour_grid, delta, no_coherence_bound, region_stats_analytic, smax_analytic, smax_empirical,
    BinningSpec, BootstrapOptions, BootstrapTarget, GridRange, SmaxOptions, SmaxStatus,
};
use macrocoherence::{GaussianStateSpec, Quadrature, Region, SqueezingPuritySpec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn squeezed(db: f64, purity: f64) -> GaussianStateSpec {
    SqueezingPuritySpec::new(db, purity).unwrap().to_state().unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn vacuum_distance() -> Outcome {
    let reference = common::smax(1.0, 1.0);
    ensure!((reference - 0.509).abs() < 1e-3, "quadrature oracle gives {reference}");
    let (r, t) = timed(|| smax_analytic(&GaussianStateSpec::VACUUM));
    let s = r.map_err(|e| e.to_string())?.s_max;
    ensure!((0.50..=0.52).contains(&s), "S_max = {s} outside [0.50, 0.52]");
    ensure!((s - reference).abs() < 2e-6, "S_max = {s} disagrees with oracle {reference}");
    ensure!(t < Duration::from_secs(1), "took {t:?}");
    Ok(format!("S_max = {s:.6} (oracle {reference:.6}), {t:.2?}"))
}

fn model_state(db: f64, purity: f64, band: (f64, f64)) -> Outcome {
    let (vx, vp) = common::squeezed(db, purity);
    let reference = common::smax(vx, vp);
    let (r, t) = timed(|| smax_analytic(&squeezed(db, purity)));
    let s = r.map_err(|e| e.to_string())?.s_max;
    ensure!((band.0..=band.1).contains(&s), "S_max = {s} outside [{}, {}]", band.0, band.1);
    ensure!((s - reference).abs() < 2e-6, "S_max = {s} disagrees with oracle {reference}");
    ensure!(t < Duration::from_secs(1), "took {t:?}");
    Ok(format!("({db} dB, {purity}) S_max = {s:.6} (oracle {reference:.6}), {t:.2?}"))
}

fn pure_scaling() -> Outcome {
    let mut ratios = Vec::new();
    for db in [0.0, -3.0, -6.0, -10.0] {
        let state = squeezed(db, 1.0);
        let s = smax_analytic(&state).map_err(|e| e.to_string())?.s_max;
        let ratio = s / state.sigma_x();
        ensure!((0.45..=0.55).contains(&ratio), "{db} dB: S_max / sigma_x = {ratio}");
        ratios.push(format!("{db} dB: {ratio:.5}"));
    }
    Ok(format!("S_max / sigma_x = {}", ratios.join(", ")))
}

fn empirical_agreement() -> Outcome {
    const N: usize = 1_000_000;
    const RESAMPLES: usize = 500;
    let start = Instant::now();
    let mut lines = Vec::new();
    for (k, (label, state)) in [("vacuum", GaussianStateSpec::VACUUM), ("30 mW", squeezed(-5.7, 0.85))]
        .into_iter()
        .enumerate()
    {
        let seed = 1000 + 2 * k as u64;
        let x = sample_quadrature_with(&AcquisitionSpec::new(state, Quadrature::X, N, seed), Execution::Parallel)
            .map_err(|e| e.to_string())?;
        let p = sample_quadrature_with(&AcquisitionSpec::new(state, Quadrature::P, N, seed + 1), Execution::Parallel)
            .map_err(|e| e.to_string())?;
        let opts = SmaxOptions::default();
        let boot = BootstrapOptions {
            resamples: RESAMPLES,
            seed: 7,
            target: BootstrapTarget::Smax,
            center: opts.center,
            smax: opts,
        };
        let emp = smax_empirical(&x.samples, &p.samples, &opts, Some(&boot)).map_err(|e| e.to_string())?;
        let ana = smax_analytic(&state).map_err(|e| e.to_string())?.s_max;
        let est = emp.uncertainty.ok_or("no bootstrap estimate")?;
        let u = est.std_dev;
        let diff = (emp.result.s_max - ana).abs();
        ensure!(emp.result.status == SmaxStatus::Crossing, "{label}: status {:?}", emp.result.status);
        ensure!(u <= 0.02, "{label}: bootstrap uncertainty {u} > 0.02");
        ensure!(diff < 3.0 * u, "{label}: |{} - {ana}| = {diff} >= 3 x {u}", emp.result.s_max);
        ensure!(!est.excessive_redraws, "{label}: {} redraws", est.redrawn);
        lines.push(format!("{label}: {:.5} vs {ana:.5} +- {u:.5}", emp.result.s_max));
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(60), "took {t:?}");
    Ok(format!("{} ({RESAMPLES} resamples), {t:.2?}", lines.join("; ")))
}

fn displacement_and_loss() -> Outcome {
    let base = smax_analytic(&GaussianStateSpec::VACUUM).map_err(|e| e.to_string())?.s_max;
    let mut worst = 0.0f64;
    for mean in [1.0, -37.5, 1e3, 12_345.678, 1e5, -1e5] {
        let state = GaussianStateSpec::coherent(mean, 0.5 * mean).map_err(|e| e.to_string())?;
        let s = smax_analytic(&state).map_err(|e| e.to_string())?.s_max;
        worst = worst.max((s - base).abs());
        ensure!((s - base).abs() < 1e-6, "mean {mean}: S_max = {s} vs {base}");
    }
    for eta in [0.1, 0.5, 0.94] {
        let state = GaussianStateSpec::VACUUM.apply_loss(eta).map_err(|e| e.to_string())?;
        let s = smax_analytic(&state).map_err(|e| e.to_string())?.s_max;
        worst = worst.max((s - base).abs());
        ensure!((s - base).abs() < 1e-6, "eta {eta}: S_max = {s} vs {base}");
    }
    Ok(format!("max deviation from vacuum {worst:.2e}"))
}

fn contour_sanity() -> Outcome {
    let (grid, t) = timed(|| {
        contour_grid(
            GridRange::new(-12.0, 0.0, 61).unwrap(),
            GridRange::new(0.5, 1.0, 51).unwrap(),
            &SmaxOptions::default(),
        )
    });
    let grid = grid.map_err(|e| e.to_string())?;
    let resolution = SmaxOptions::default().tolerance;
    for i in 0..grid.squeezing_db.len() {
        for j in 1..grid.purity.len() {
            let (lo, hi) = (grid.get(i, j - 1), grid.get(i, j));
            ensure!(
                hi >= lo - resolution,
                "S_max decreases along purity at {} dB: {lo} -> {hi}",
                grid.squeezing_db[i]
            );
        }
    }
    let corner = grid.get(60, 50);
    let vacuum = smax_analytic(&GaussianStateSpec::VACUUM).map_err(|e| e.to_string())?.s_max;
    ensure!(
        grid.squeezing_db[60] == 0.0 && grid.purity[50] == 1.0 && (corner - vacuum).abs() < 1e-12,
        "(0 dB, 1.0) node {corner} vs vacuum {vacuum}"
    );
    let at30 = grid.interpolate(-5.7, 0.85).ok_or("30 mW symbol off grid")?;
    let at70 = grid.interpolate(-7.7, 0.66).ok_or("70 mW symbol off grid")?;
    ensure!((0.81..=0.85).contains(&at30), "30 mW contour value {at30}");
    ensure!((0.35..=0.45).contains(&at70), "70 mW contour value {at70}");
    ensure!(t < Duration::from_secs(30), "took {t:?}");
    Ok(format!("61x51 grid, corner {corner:.6}, 30 mW {at30:.4}, 70 mW {at70:.4}, {t:.2?}"))
}

fn property_suites() -> Outcome {
    let states = [
        GaussianStateSpec::VACUUM,
        squeezed(-5.7, 0.85),
        squeezed(-7.7, 0.66),
        squeezed(-10.0, 1.0),
        GaussianStateSpec::new(3.0, -1.0, 2.5, 0.9).unwrap(),
    ];
    let mut checked = 0;
    for state in &states {
        for s in [0.0, 0.05, 0.3, 0.8, 2.0, 6.0] {
            let bins = BinningSpec::new(s, state.mean_x).unwrap();
            let stats = region_stats_analytic(state, &bins).map_err(|e| e.to_string())?;
            let total: f64 = Region::ALL.iter().map(|&r| stats.region(r).prob).sum();
            ensure!((total - 1.0).abs() < 1e-12, "sum of probabilities {total}");
            let law: f64 = Region::ALL
                .iter()
                .map(|&r| {
                    let m = stats.region(r);
                    m.prob * (m.var + m.mean.powi(2))
                })
                .sum();
            ensure!((law - state.var_x).abs() < 1e-10 * state.var_x.max(1.0), "total variance {law} vs {}", state.var_x);
            let d = delta(&stats, s);
            ensure!(d > s * s / 2.0, "delta {d} <= S^2/2 at S = {s}");
            let (plus, minus) = (stats.region(Region::Plus), stats.region(Region::Minus));
            ensure!(
                (plus.prob - minus.prob).abs() < 1e-12
                    && (plus.mean + minus.mean).abs() < 1e-9
                    && (plus.var - minus.var).abs() < 1e-9,
                "outer regions not symmetric at S = {s}"
            );
            checked += 1;
        }
    }

    let mut worst_z = f64::INFINITY;
    for (k, state) in [GaussianStateSpec::VACUUM, squeezed(-5.7, 0.85)].iter().enumerate() {
        let joint = sample_joint(state, 200_000, 50 + k as u64).map_err(|e| e.to_string())?;
        for s in [0.2, 0.5, 1.0] {
            let bins = BinningSpec::new(s, 0.0).unwrap();
            let diag = no_coherence_bound(&joint.x, &joint.p, &bins).map_err(|e| e.to_string())?;
            worst_z = worst_z.min(diag.z_score());
            ensure!(diag.z_score() >= -5.0, "diagnostic slack {} standard errors", diag.z_score());
        }
    }

    let spec = AcquisitionSpec::new(squeezed(-5.7, 0.85), Quadrature::X, 3 * 65_536 + 101, 4242).with_efficiency(0.94);
    let serial = sample_quadrature_with(&spec, Execution::Serial).map_err(|e| e.to_string())?;
    let parallel = sample_quadrature_with(&spec, Execution::Parallel).map_err(|e| e.to_string())?;
    ensure!(
        serial.samples.iter().zip(&parallel.samples).all(|(a, b)| a.to_bits() == b.to_bits()),
        "serial and parallel sampling differ"
    );
    for encoding in [Encoding::Text, Encoding::Binary] {
        let mut buf = Vec::new();
        write_series(&serial, &mut buf, encoding).map_err(|e| e.to_string())?;
        let back = read_series(&buf[..]).map_err(|e| e.to_string())?;
        ensure!(
            back.samples.len() == serial.samples.len()
                && back.samples.iter().zip(&serial.samples).all(|(a, b)| a.to_bits() == b.to_bits())
                && back.metadata == serial.metadata,
            "{encoding} round trip is not bit-identical"
        );
    }
    Ok(format!(
        "{checked} analytic cases, worst diagnostic z = {worst_z:.2}, sampling and file round trips bit-identical"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("vacuum witness distance", vacuum_distance),
        ("30 mW state", || model_state(-5.7, 0.85, (0.81, 0.85))),
        ("70 mW state", || model_state(-7.7, 0.66, (0.35, 0.45))),
        ("pure squeezed scaling", pure_scaling),
        ("empirical vs analytic", empirical_agreement),
        ("displacement and loss immunity", displacement_and_loss),
        ("contour sanity", contour_sanity),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_owned()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", k + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {reason}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
