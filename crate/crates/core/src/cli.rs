use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use macrocoherence::dataio::{
    read_series_file, write_contour_csv, write_curve_csv, write_histogram_csv, write_result,
    write_scan_csv, write_series_file, ContourInputs, CurveInputs, DataInputs, Encoding,
    HistogramInputs, LabeledCurve, Quadrature, QuadratureSeries, Record, ResultDocument, RunPair,
    SeriesRef, SeriesSummary, SimulationInputs, SmaxInputs, SmaxOutputs, SmaxSource, StateInputs,
};
use macrocoherence::sampler::{sample_quadrature, AcquisitionSpec};
use macrocoherence::witness::{
    bootstrap_uncertainty, contour_grid, region_histograms, sample_variance, smax_analytic_with,
    smax_empirical, theory_curve, witness_empirical, BinningSpec, BootstrapOptions, BootstrapTarget,
    CenterPolicy, GridRange, SmaxOptions,
};
use macrocoherence::{Error, GaussianStateSpec, SqueezingPuritySpec};

/// Directory that relative `--out` paths are resolved against.
pub const OUT_DIR_ENV: &str = "MACROCOHERENCE_OUT_DIR";

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "macrocoherence",
    version,
    about = "Witness generalized macroscopic superpositions in Gaussian quadrature data"
)]
struct Cli {
    /// Emit the versioned JSON result document instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a homodyne run of one quadrature and write a series file.
    Simulate(SimulateArgs),
    /// Evaluate the witness on measured x and p runs.
    Witness(WitnessArgs),
    /// Largest distance S at which the witness is violated.
    Smax(SmaxArgs),
    /// Witness left-hand side against S for modeled states.
    TheoryCurve(CurveArgs),
    /// S_max over a squeezing x purity grid.
    Contour(ContourArgs),
    /// Separately normalized region densities of an x run.
    Histogram(HistogramArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QuadratureArg {
    X,
    P,
}

impl From<QuadratureArg> for Quadrature {
    fn from(q: QuadratureArg) -> Self {
        match q {
            QuadratureArg::X => Quadrature::X,
            QuadratureArg::P => Quadrature::P,
        }
    }
}

#[derive(Debug, Args, Default)]
struct StateArgs {
    /// Vacuum (or coherent, with --mean-x/--mean-p) state.
    #[arg(long)]
    vacuum: bool,
    /// Squeezing of p in dB relative to shot noise (negative).
    #[arg(long, allow_hyphen_values = true)]
    squeezing_db: Option<f64>,
    /// Interpret a positive --squeezing-db as a magnitude.
    #[arg(long)]
    positive_db: bool,
    /// Purity used with --squeezing-db.
    #[arg(long)]
    purity: Option<f64>,
    #[arg(long)]
    var_x: Option<f64>,
    #[arg(long)]
    var_p: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    mean_x: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    mean_p: f64,
    /// Detection efficiency applied as loss before evaluation.
    #[arg(long, default_value_t = 1.0)]
    efficiency: f64,
}

impl StateArgs {
    fn given(&self) -> bool {
        self.vacuum || self.squeezing_db.is_some() || self.var_x.is_some() || self.var_p.is_some()
    }

    fn resolve(&self) -> Result<StateInputs, CliError> {
        let chosen = [self.vacuum, self.squeezing_db.is_some(), self.var_x.is_some() || self.var_p.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        if chosen != 1 {
            return Err(CliError::usage(
                "give exactly one of --vacuum, --squeezing-db, or --var-x with --var-p",
            ));
        }
        let (base, squeezing, label) = if self.vacuum {
            (GaussianStateSpec::VACUUM, None, "vacuum".to_owned())
        } else if let Some(db) = self.squeezing_db {
            let db = if db > 0.0 {
                if !self.positive_db {
                    return Err(CliError::usage(
                        "--squeezing-db must be <= 0 (pass --positive-db to give a magnitude)",
                    ));
                }
                -db
            } else {
                db
            };
            let spec = SqueezingPuritySpec::new(db, self.purity.unwrap_or(1.0)).map_err(CliError::usage_from)?;
            let state = spec.to_state().map_err(CliError::usage_from)?;
            (state, Some(spec), format!("{db}dB/{}", spec.purity))
        } else {
            let (Some(vx), Some(vp)) = (self.var_x, self.var_p) else {
                return Err(CliError::usage("--var-x and --var-p must be given together"));
            };
            let state = GaussianStateSpec::new(0.0, 0.0, vx, vp).map_err(CliError::usage_from)?;
            (state, None, format!("var_x={vx}/var_p={vp}"))
        };
        if self.purity.is_some() && squeezing.is_none() {
            return Err(CliError::usage("--purity only applies with --squeezing-db"));
        }
        let state = base
            .displaced(self.mean_x, self.mean_p)
            .and_then(|s| s.apply_loss(self.efficiency))
            .map_err(CliError::usage_from)?;
        Ok(StateInputs {
            label: Some(label),
            state,
            squeezing,
            efficiency: self.efficiency,
        })
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, value_enum)]
    quadrature: QuadratureArg,
    #[arg(long, default_value_t = 1_000_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write little-endian binary64 samples instead of text.
    #[arg(long)]
    binary: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    x_file: PathBuf,
    #[arg(long)]
    p_file: PathBuf,
}

#[derive(Debug, Args)]
struct WitnessArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Distance S between the outer regions.
    #[arg(long, required_unless_present = "scan", conflicts_with = "scan")]
    distance: Option<f64>,
    /// Evaluate on the grid 0, step, ..., --scan-max.
    #[arg(long)]
    scan: bool,
    #[arg(long, default_value_t = 1.5)]
    scan_max: f64,
    #[arg(long, default_value_t = 0.01)]
    scan_step: f64,
    /// Bootstrap resamples for the lhs uncertainty (0 disables).
    #[arg(long, default_value_t = 0)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed bin center instead of the sample mean.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<f64>,
    /// Write the result document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SmaxArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, requires = "p_file")]
    x_file: Option<PathBuf>,
    #[arg(long, requires = "x_file")]
    p_file: Option<PathBuf>,
    /// Bootstrap resamples for data (0 disables).
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, allow_hyphen_values = true)]
    center: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// State: `vacuum`, `DB:PURITY` (e.g. `-5.7:0.85`) or `var:VAR_X:VAR_P`.
    #[arg(long = "state", allow_hyphen_values = true)]
    states: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    s_min: f64,
    #[arg(long, default_value_t = 1.0)]
    s_max: f64,
    #[arg(long, default_value_t = 0.1)]
    s_step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ContourArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = -12.0)]
    db_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    db_max: f64,
    #[arg(long, default_value_t = 61)]
    db_points: usize,
    #[arg(long, default_value_t = 0.5)]
    purity_min: f64,
    #[arg(long, default_value_t = 1.0)]
    purity_max: f64,
    #[arg(long, default_value_t = 51)]
    purity_points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HistogramArgs {
    #[arg(long)]
    x_file: PathBuf,
    #[arg(long)]
    distance: f64,
    #[arg(long, allow_hyphen_values = true)]
    bin_width: f64,
    #[arg(long, allow_hyphen_values = true)]
    center: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    code: i32,
    message: String,
    broken_pipe: bool,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
            broken_pipe: false,
        }
    }

    fn usage_from(e: Error) -> Self {
        Self::usage(e.to_string())
    }

    fn tag(&self) -> &'static str {
        match self.code {
            EXIT_USAGE => "usage",
            EXIT_DATA => "data",
            EXIT_NUMERIC => "numeric",
            _ => "internal",
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let broken_pipe = matches!(&e, Error::Stream(io) if io.kind() == io::ErrorKind::BrokenPipe);
        let code = match &e {
            Error::InvalidState(_) | Error::InvalidParameter { .. } | Error::DegenerateInterval { .. } => EXIT_USAGE,
            Error::BracketNotFound { .. } | Error::NegligibleMass { .. } | Error::EmptyRegion { .. } => EXIT_NUMERIC,
            _ => EXIT_DATA,
        };
        CliError {
            code,
            message: e.to_string(),
            broken_pipe,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

fn out_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_owned(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    let path = out_path(path);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io { path, source }.into())
}

fn load(path: &Path, expected: Quadrature) -> Result<QuadratureSeries, CliError> {
    let series = read_series_file(path)?;
    if series.quadrature != expected {
        return Err(Error::MalformedHeader(format!(
            "{} holds quadrature {}, expected {expected}",
            path.display(),
            series.quadrature
        ))
        .into());
    }
    Ok(series)
}

fn load_pair(x: &Path, p: &Path) -> Result<RunPair, CliError> {
    Ok(RunPair::new(load(x, Quadrature::X)?, load(p, Quadrature::P)?)?)
}

fn center_policy(center: Option<f64>) -> CenterPolicy {
    center.map_or(CenterPolicy::Mean, CenterPolicy::Fixed)
}

fn parse_state_token(token: &str) -> Result<StateInputs, CliError> {
    let bad = || CliError::usage(format!("cannot parse state `{token}`"));
    let args = if token == "vacuum" {
        StateArgs {
            vacuum: true,
            efficiency: 1.0,
            ..Default::default()
        }
    } else if let Some(rest) = token.strip_prefix("var:") {
        let (vx, vp) = rest.split_once(':').ok_or_else(bad)?;
        StateArgs {
            var_x: Some(vx.parse().map_err(|_| bad())?),
            var_p: Some(vp.parse().map_err(|_| bad())?),
            efficiency: 1.0,
            ..Default::default()
        }
    } else {
        let (db, purity) = token.split_once(':').ok_or_else(bad)?;
        StateArgs {
            squeezing_db: Some(db.parse().map_err(|_| bad())?),
            purity: Some(purity.parse().map_err(|_| bad())?),
            efficiency: 1.0,
            ..Default::default()
        }
    };
    let mut inputs = args.resolve()?;
    inputs.label = Some(token.to_owned());
    Ok(inputs)
}

fn emit(doc: &ResultDocument, text: &str, json: bool) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    if json {
        write_result(doc, &mut lock)?;
    } else {
        lock.write_all(text.as_bytes())?;
        lock.flush()?;
    }
    Ok(())
}

fn simulate(args: SimulateArgs, json: bool) -> Result<(), CliError> {
    if !args.state.given() {
        return Err(CliError::usage("a state is required"));
    }
    // efficiency is applied by the sampler, so resolve the lossless state
    let efficiency = args.state.efficiency;
    let model = StateArgs {
        efficiency: 1.0,
        ..args.state
    }
    .resolve()?;
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(CliError::usage(format!("--efficiency must lie in [0, 1], got {efficiency}")));
    }
    let spec = AcquisitionSpec::new(model.state, args.quadrature.into(), args.count, args.seed).with_efficiency(efficiency);
    let series = sample_quadrature(&spec).map_err(|e| match e {
        Error::InvalidParameter { .. } => CliError::usage_from(e),
        e => e.into(),
    })?;
    let encoding = if args.binary { Encoding::Binary } else { Encoding::Text };
    let path = out_path(&args.out);
    write_series_file(&series, &path, encoding)?;
    let mean = series.samples.iter().sum::<f64>() / series.len() as f64;
    let var = if series.len() > 1 { sample_variance(&series.samples)? } else { 0.0 };
    let doc = ResultDocument::new(Record::Simulation {
        inputs: SimulationInputs {
            model: StateInputs { efficiency, ..model },
            quadrature: spec.quadrature,
            count: spec.count,
            seed: spec.seed,
            encoding,
        },
        outputs: SeriesSummary {
            series: SeriesRef::of(&series, Some(&path)),
            sample_mean: mean,
            sample_var: var,
        },
    });
    let text = format!(
        "wrote {} {} samples to {}\nsample_mean: {mean}\nsample_var: {var}\n",
        series.len(),
        series.quadrature,
        path.display()
    );
    emit(&doc, &text, json)
}

fn witness(args: WitnessArgs, json: bool) -> Result<(), CliError> {
    let pair = load_pair(&args.data.x_file, &args.data.p_file)?;
    let (x, p) = (&pair.x_series.samples, &pair.p_series.samples);
    let center = center_policy(args.center);
    let distances: Vec<f64> = if args.scan {
        if !(args.scan_step > 0.0 && args.scan_max >= 0.0) {
            return Err(CliError::usage("--scan-step must be > 0 and --scan-max >= 0"));
        }
        let n = (args.scan_max / args.scan_step + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * args.scan_step).collect()
    } else {
        vec![args.distance.expect("clap enforces --distance or --scan")]
    };
    let bootstrap = (args.bootstrap > 0).then(|| BootstrapOptions {
        resamples: args.bootstrap,
        seed: args.seed,
        target: BootstrapTarget::Lhs,
        center,
        ..Default::default()
    });
    let mut results = Vec::with_capacity(distances.len());
    for &s in &distances {
        let mut r = witness_empirical(x, p, s, center)?;
        if let Some(b) = &bootstrap {
            r.uncertainty_lhs = Some(bootstrap_uncertainty(x, p, s, b)?.std_dev);
        }
        results.push(r);
    }
    let doc = ResultDocument::new(Record::Witness {
        inputs: DataInputs {
            x: SeriesRef::of(&pair.x_series, Some(&args.data.x_file)),
            p: SeriesRef::of(&pair.p_series, Some(&args.data.p_file)),
            center,
            bootstrap,
        },
        outputs: results.clone(),
    });
    if let Some(out) = &args.out {
        write_result(&doc, create(out)?)?;
    }
    let mut text = String::new();
    if args.scan {
        let mut table = Vec::new();
        write_scan_csv(&results, &mut table)?;
        text.push_str(&String::from_utf8_lossy(&table));
    } else {
        let r = &results[0];
        let _ = writeln!(text, "S: {}", r.distance);
        let _ = writeln!(text, "lhs: {}", r.lhs);
        if let Some(u) = r.uncertainty_lhs {
            let _ = writeln!(text, "lhs_uncertainty: {u}");
        }
        let _ = writeln!(text, "delta: {}", r.delta);
        let _ = writeln!(text, "var_p: {}", r.var_p);
        let _ = writeln!(text, "violated: {}", r.violated);
    }
    emit(&doc, &text, json)
}

fn smax(args: SmaxArgs, json: bool) -> Result<(), CliError> {
    let options = SmaxOptions {
        center: center_policy(args.center),
        ..Default::default()
    };
    let (source, outputs) = match (&args.x_file, &args.p_file) {
        (Some(xf), Some(pf)) => {
            if args.state.given() {
                return Err(CliError::usage("give either a state or data files, not both"));
            }
            let pair = load_pair(xf, pf)?;
            let bootstrap = (args.bootstrap > 0).then_some(BootstrapOptions {
                resamples: args.bootstrap,
                seed: args.seed,
                target: BootstrapTarget::Smax,
                center: options.center,
                smax: options,
            });
            let r = smax_empirical(&pair.x_series.samples, &pair.p_series.samples, &options, bootstrap.as_ref())?;
            let source = SmaxSource::Data(DataInputs {
                x: SeriesRef::of(&pair.x_series, Some(xf)),
                p: SeriesRef::of(&pair.p_series, Some(pf)),
                center: options.center,
                bootstrap,
            });
            (source, SmaxOutputs::from_result(&r.result, r.uncertainty))
        }
        _ => {
            if !args.state.given() {
                return Err(CliError::usage("give a state or --x-file/--p-file"));
            }
            let model = args.state.resolve()?;
            let r = smax_analytic_with(&model.state, &options)?;
            (SmaxSource::Model(model), SmaxOutputs::from_result(&r, None))
        }
    };
    let mut text = format!("s_max: {}\nstatus: {:?}\n", outputs.s_max, outputs.status);
    if let Some(u) = outputs.uncertainty {
        let _ = writeln!(text, "uncertainty: {u}");
    }
    let _ = writeln!(text, "lhs_at_zero: {}", outputs.lhs_at_zero);
    let doc = ResultDocument::new(Record::Smax {
        inputs: SmaxInputs { source, options },
        outputs,
    });
    if let Some(out) = &args.out {
        write_result(&doc, create(out)?)?;
    }
    emit(&doc, &text, json)
}

fn curve(args: CurveArgs, json: bool) -> Result<(), CliError> {
    if args.states.is_empty() {
        return Err(CliError::usage("at least one --state is required"));
    }
    if !(args.s_step > 0.0 && args.s_min >= 0.0 && args.s_max >= args.s_min) {
        return Err(CliError::usage("need 0 <= --s-min <= --s-max and --s-step > 0"));
    }
    let n = ((args.s_max - args.s_min) / args.s_step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=n).map(|k| args.s_min + k as f64 * args.s_step).collect();
    let states = args
        .states
        .iter()
        .map(|t| parse_state_token(t))
        .collect::<Result<Vec<_>, _>>()?;
    let curves = states
        .iter()
        .map(|s| {
            Ok(LabeledCurve {
                label: s.label.clone().unwrap_or_default(),
                points: theory_curve(&s.state, &grid, CenterPolicy::Mean)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut table = Vec::new();
    write_curve_csv(&curves, &mut table)?;
    if let Some(out) = &args.out {
        create(out)?.write_all(&table)?;
    }
    let doc = ResultDocument::new(Record::TheoryCurve {
        inputs: CurveInputs {
            states,
            distances: grid,
            center: CenterPolicy::Mean,
        },
        outputs: curves,
    });
    emit(&doc, &String::from_utf8_lossy(&table), json)
}

fn contour(args: ContourArgs, json: bool) -> Result<(), CliError> {
    if args.db_points < 2 || args.purity_points < 2 {
        return Err(CliError::usage("contour needs at least 2 nodes along each axis"));
    }
    let squeezing = GridRange::new(args.db_min, args.db_max, args.db_points).map_err(CliError::usage_from)?;
    let purity = GridRange::new(args.purity_min, args.purity_max, args.purity_points).map_err(CliError::usage_from)?;
    let options = SmaxOptions::default();
    let grid = contour_grid(squeezing, purity, &options)?;
    let mut table = Vec::new();
    write_contour_csv(&grid, &mut table)?;
    if let Some(out) = &args.out {
        create(out)?.write_all(&table)?;
    }
    let doc = ResultDocument::new(Record::Contour {
        inputs: ContourInputs {
            squeezing_db: squeezing,
            purity,
            options,
        },
        outputs: grid,
    });
    emit(&doc, &String::from_utf8_lossy(&table), json)
}

fn histogram(args: HistogramArgs, json: bool) -> Result<(), CliError> {
    if args.bin_width.is_nan() || args.bin_width <= 0.0 {
        return Err(CliError::usage("--bin-width must be positive"));
    }
    let series = load(&args.x_file, Quadrature::X)?;
    if series.is_empty() {
        return Err(Error::EmptySeries.into());
    }
    let mean = series.samples.iter().sum::<f64>() / series.len() as f64;
    let bins = BinningSpec::new(args.distance, args.center.unwrap_or(mean)).map_err(CliError::usage_from)?;
    let hist = region_histograms(&series.samples, &bins, args.bin_width)?;
    let mut table = Vec::new();
    write_histogram_csv(&hist, &mut table)?;
    if let Some(out) = &args.out {
        create(out)?.write_all(&table)?;
    }
    let mut text = String::new();
    for h in hist.iter() {
        if h.is_empty() {
            let label = h.region.map_or("all", |r| r.label());
            let _ = writeln!(text, "# region {label} is empty");
        }
    }
    text.push_str(&String::from_utf8_lossy(&table));
    let doc = ResultDocument::new(Record::Histogram {
        inputs: HistogramInputs {
            x: SeriesRef::of(&series, Some(&args.x_file)),
            distance: bins.distance,
            center: bins.center,
            bin_width: args.bin_width,
        },
        outputs: hist,
    });
    emit(&doc, &text, json)
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let rendered = e.to_string();
            let first = rendered
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            return EXIT_USAGE;
        }
    };
    let json = cli.json;
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a, json),
        Command::Witness(a) => witness(a, json),
        Command::Smax(a) => smax(a, json),
        Command::TheoryCurve(a) => curve(a, json),
        Command::Contour(a) => contour(a, json),
        Command::Histogram(a) => histogram(a, json),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) if e.broken_pipe => 0,
        Err(e) => {
            eprintln!("error[{}]: {}", e.tag(), e.message.replace('\n', " "));
            e.code
        }
    }
}
