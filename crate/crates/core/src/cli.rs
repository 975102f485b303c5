//! The `resrig` command line.
//!
//! Exit codes: 0 success, 1 output could not be written, 2 invalid flags,
//! 3 a computation stage failed, 4 no calibration available.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::cache::{write_atomic, write_numeric_csv, CacheKey, Lookup, ResonanceCache, ResonanceDocument};
use crate::geometry::GeometricInvariants;
use crate::heat::{
    calibrate_from_set, required_l_max, CalibrationConstants, HeatCoefficients, HeatPipelineConfig, HeatSamples,
    LiteratureAlphas,
};
use crate::radial::{ball_resonances, BoundaryCondition, ResonanceSet, DEFAULT_L_MAX};
use crate::rigidity::{identify, recover_invariants, IdentifyResult, PIPELINE_TOLERANCE};
use crate::scattering::{det_s_product, fit_constant_c, CanonicalProductParams, DirectDeterminant};
use crate::wave::{singular_support_scan_with, WaveConvention};
use crate::{Error, VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_NO_CALIBRATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "resrig", version = VERSION, about = "Exterior-ball resonances and the equal-ball rigidity test")]
pub struct Cli {
    /// Cache directory; defaults to $RESRIG_CACHE_DIR, then the user cache dir.
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Neither read nor write cached resonances.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Resonances of the exterior of B(rho), as JSON.
    Resonances(ResonancesArgs),
    /// Resonances to heat invariants to the equal-ball verdict.
    Pipeline(PipelineArgs),
    /// Scattering determinant on a real grid, directly and as a product.
    Scatdet(ScatdetArgs),
    /// Smoothed wave trace over a time grid for shrinking widths.
    Wavetrace(WavetraceArgs),
}

#[derive(Debug, Args)]
struct ResonancesArgs {
    #[arg(long, value_parser = parse_dimension)]
    d: u32,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    rho: f64,
    #[arg(long, default_value_t = DEFAULT_L_MAX)]
    lmax: u32,
    #[arg(long, default_value = "neumann")]
    bc: BoundaryCondition,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[arg(long, value_parser = parse_dimension)]
    d: u32,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    rho: f64,
    /// Highest mode; by default enough for the smallest time.
    #[arg(long)]
    lmax: Option<u32>,
    /// Time window in units of (1/min|lambda|)^2.
    #[arg(long, default_value_t = 1e-3, value_parser = parse_positive)]
    tmin: f64,
    #[arg(long, default_value_t = 1e-1, value_parser = parse_positive)]
    tmax: f64,
    #[arg(long, default_value_t = 24)]
    nt: usize,
    /// Directory for CSV and JSON results.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compute the dimension constants on the unit ball and store them.
    #[arg(long)]
    calibrate: bool,
    /// Calibration file; defaults to calibration-d<D>.json in the cache dir.
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// Reference constants to compare a fresh calibration against.
    #[arg(long, requires = "calibrate")]
    literature: Option<PathBuf>,
    /// Skip the resonance stages and decide from A1,A2,A3.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true)]
    invariants: Option<Vec<f64>>,
    /// Relative tolerance of the decision.
    #[arg(long, default_value_t = PIPELINE_TOLERANCE, value_parser = parse_positive)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DetMode {
    Direct,
    Product,
    Both,
}

#[derive(Debug, Args)]
struct ScatdetArgs {
    #[arg(long, value_parser = parse_dimension)]
    d: u32,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    rho: f64,
    #[arg(long, default_value_t = DEFAULT_L_MAX)]
    lmax: u32,
    #[arg(long, default_value = "neumann")]
    bc: BoundaryCondition,
    #[arg(long, default_value_t = 0.1, value_parser = parse_positive)]
    lambda_min: f64,
    #[arg(long, default_value_t = 3.0, value_parser = parse_positive)]
    lambda_max: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[arg(long, value_enum, default_value_t = DetMode::Both)]
    mode: DetMode,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    Decaying,
    Literal,
}

#[derive(Debug, Args)]
struct WavetraceArgs {
    #[arg(long, value_parser = parse_dimension)]
    d: u32,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    rho: f64,
    /// Highest mode; by default enough for the narrowest width.
    #[arg(long)]
    lmax: Option<u32>,
    #[arg(long, default_value = "neumann")]
    bc: BoundaryCondition,
    /// Explicit times; overrides the uniform grid.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true)]
    times: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.1)]
    tmin: f64,
    #[arg(long, default_value_t = 4.0)]
    tmax: f64,
    #[arg(long, default_value_t = 40)]
    nt: usize,
    /// Decreasing smoothing widths.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "0.2,0.1,0.05")]
    eps: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ConventionArg::Decaying)]
    convention: ConventionArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_dimension(s: &str) -> Result<u32, String> {
    let d: u32 = s.parse().map_err(|_| format!("`{s}` is not a dimension"))?;
    if d < 3 || d % 2 == 0 {
        return Err(format!("dimension must be odd and at least 3, got {d}"));
    }
    Ok(d)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Stage { stage: &'static str, error: Error },
    MissingCalibration(PathBuf),
    Output(Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Stage { .. } => EXIT_SOLVER,
            Failure::MissingCalibration(_) => EXIT_NO_CALIBRATION,
            Failure::Output(_) => EXIT_OUTPUT,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => format!("error: {m}"),
            Failure::Stage { stage, error } => format!("error: stage `{stage}` failed: {error}"),
            Failure::MissingCalibration(path) => format!(
                "error: no calibration at {}; rerun with --calibrate to compute it (or pass --calibration FILE)",
                path.display()
            ),
            Failure::Output(e) => format!("error: could not write output: {e}"),
        }
    }
}

/// Maps a module error to a failure of `stage`.
fn at<E: Into<Error>>(stage: &'static str) -> impl FnOnce(E) -> Failure {
    move |e| Failure::Stage { stage, error: e.into() }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Output(Error::Io {
            path: "<stdout>".into(),
            source: e,
        })
    }
}

struct Context<'a> {
    cache: ResonanceCache,
    use_cache: bool,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{}", e.render());
                EXIT_OK
            };
            return code;
        }
    };
    let mut ctx = Context {
        cache: cli.cache_dir.map(ResonanceCache::new).unwrap_or_else(ResonanceCache::from_env),
        use_cache: !cli.no_cache,
        stdout,
        stderr,
    };
    let result = match cli.command {
        Command::Resonances(a) => cmd_resonances(&mut ctx, a),
        Command::Pipeline(a) => cmd_pipeline(&mut ctx, a),
        Command::Scatdet(a) => cmd_scatdet(&mut ctx, a),
        Command::Wavetrace(a) => cmd_wavetrace(&mut ctx, a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(ctx.stderr, "{}", f.message());
            f.code()
        }
    }
}

impl Context<'_> {
    fn resonances(&mut self, d: u32, rho: f64, bc: BoundaryCondition, l_max: u32) -> Result<ResonanceSet, Failure> {
        let compute = || ball_resonances(d, rho, l_max, bc).map_err(at("resonances"));
        if !self.use_cache {
            return compute();
        }
        let key = CacheKey::new(d, rho, bc, l_max);
        match self.cache.load(&key) {
            Lookup::Hit(set) => return Ok(set),
            Lookup::Miss => {}
            Lookup::Rejected(why) => {
                let _ = writeln!(
                    self.stderr,
                    "warning: discarding cache entry {} ({why}); recomputing",
                    self.cache.path_for(&key).display()
                );
            }
        }
        let set = compute()?;
        if let Err(e) = self.cache.store(&key, &set) {
            let _ = writeln!(self.stderr, "warning: could not cache resonances: {e}");
        }
        Ok(set)
    }

    fn emit(&mut self, path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
        match path {
            Some(p) => write_atomic(p, bytes).map_err(Failure::Output),
            None => Ok(self.stdout.write_all(bytes)?),
        }
    }
}

fn cmd_resonances(ctx: &mut Context<'_>, a: ResonancesArgs) -> Result<(), Failure> {
    let set = ctx.resonances(a.d, a.rho, a.bc, a.lmax)?;
    let json = ResonanceDocument::from_set(&set).to_json();
    ctx.emit(a.out.as_deref(), json.as_bytes())
}

#[derive(Serialize)]
struct PipelineReport<'a> {
    version: &'static str,
    d: u32,
    rho: Option<f64>,
    l_max: Option<u32>,
    length_scale: Option<f64>,
    calibration: Option<&'a CalibrationConstants>,
    coefficients: Option<&'a HeatCoefficients>,
    invariants: &'a GeometricInvariants,
    identify: &'a IdentifyResult,
}

fn cmd_pipeline(ctx: &mut Context<'_>, a: PipelineArgs) -> Result<(), Failure> {
    if let Some(values) = &a.invariants {
        let [a1, a2, a3]: [f64; 3] = values
            .as_slice()
            .try_into()
            .map_err(|_| Failure::Usage(format!("--invariants needs three values, got {}", values.len())))?;
        let inv = GeometricInvariants::new(a.d, a1, a2, a3);
        let verdict = identify(&inv, a.tol).map_err(at("identify"))?;
        let report = PipelineReport {
            version: VERSION,
            d: a.d,
            rho: None,
            l_max: None,
            length_scale: None,
            calibration: None,
            coefficients: None,
            invariants: &inv,
            identify: &verdict,
        };
        return finish_pipeline(ctx, a.out.as_deref(), None, &report);
    }

    if a.tmin >= a.tmax {
        return Err(Failure::Usage(format!("--tmin {} must be below --tmax {}", a.tmin, a.tmax)));
    }
    if a.nt < 8 {
        return Err(Failure::Usage(format!("--nt {} is too small for the fit (need at least 8)", a.nt)));
    }
    let config = HeatPipelineConfig {
        t_min: a.tmin,
        t_max: a.tmax,
        nt: a.nt,
        ..HeatPipelineConfig::default()
    };
    // The time window is in units of the obstacle's own length, so the mode
    // count does not depend on rho.
    let l_max = a.lmax.unwrap_or_else(|| required_l_max(1.0, a.tmin));
    let cal_path = a
        .calibration
        .clone()
        .unwrap_or_else(|| ctx.cache.dir().join(format!("calibration-d{}.json", a.d)));

    let cal = if a.calibrate {
        let unit = ctx.resonances(a.d, 1.0, BoundaryCondition::Neumann, l_max)?;
        let cal = calibrate_from_set(&unit, 1.0, &config).map_err(at("calibration"))?;
        let body = serde_json::to_vec_pretty(&cal).expect("calibration serializes");
        write_atomic(&cal_path, &body).map_err(Failure::Output)?;
        let _ = writeln!(ctx.stderr, "calibration written to {}", cal_path.display());
        if let Some(lit) = &a.literature {
            let table = LiteratureAlphas::load(lit).map_err(at("calibration"))?;
            match table.compare(&cal, [0.01; 3]) {
                Some(cmp) => {
                    let _ = writeln!(
                        ctx.stderr,
                        "literature comparison: relative differences {:.3e}, {:.3e}, {:.3e}",
                        cmp.relative_difference[0], cmp.relative_difference[1], cmp.relative_difference[2]
                    );
                }
                None => {
                    let _ = writeln!(ctx.stderr, "literature table has no entry for d = {}", a.d);
                }
            }
        }
        cal
    } else {
        let text = match fs::read_to_string(&cal_path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Failure::MissingCalibration(cal_path)),
            Err(e) => return Err(at("calibration")(Error::io(&cal_path, e))),
        };
        let cal: CalibrationConstants = serde_json::from_str(&text)
            .map_err(|e| at("calibration")(Error::parse("calibration file", e.to_string())))?;
        if cal.t_min != a.tmin || cal.t_max != a.tmax || cal.nt != a.nt {
            let _ = writeln!(
                ctx.stderr,
                "warning: calibration used t in [{}, {}] with {} samples; this run uses [{}, {}] with {}",
                cal.t_min, cal.t_max, cal.nt, a.tmin, a.tmax, a.nt
            );
        }
        cal
    };

    let set = ctx.resonances(a.d, a.rho, BoundaryCondition::Neumann, l_max)?;
    let (run, inv) = recover_invariants(&set, &cal, &config).map_err(at("heat"))?;
    let verdict = identify(&inv, a.tol).map_err(at("identify"))?;
    let report = PipelineReport {
        version: VERSION,
        d: a.d,
        rho: Some(a.rho),
        l_max: Some(l_max),
        length_scale: Some(run.length_scale),
        calibration: Some(&cal),
        coefficients: Some(&run.coefficients),
        invariants: &inv,
        identify: &verdict,
    };
    finish_pipeline(ctx, a.out.as_deref(), Some(&run.samples), &report)
}

fn finish_pipeline(
    ctx: &mut Context<'_>,
    out: Option<&Path>,
    samples: Option<&HeatSamples>,
    report: &PipelineReport<'_>,
) -> Result<(), Failure> {
    let summary = format!("{}\n", report.identify);
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Failure::Output(Error::io(dir, e)))?;
        if let Some(s) = samples {
            let mut header = vec!["t", "value"];
            let rows: Vec<Vec<f64>> = match &s.truncation_estimates {
                Some(est) => {
                    header.push("truncation_estimate");
                    (0..s.len()).map(|i| vec![s.times[i], s.values[i], est[i]]).collect()
                }
                None => (0..s.len()).map(|i| vec![s.times[i], s.values[i]]).collect(),
            };
            write_file(dir, "heat_samples.csv", |w| write_numeric_csv(w, &header, &rows))?;
        }
        if let Some(c) = report.coefficients {
            write_file(dir, "coefficients.csv", |w| {
                writeln!(w, "n,a,std_error,c_entangled")?;
                for (n, an) in c.a.iter().enumerate() {
                    writeln!(w, "{n},{an:.16e},{:.16e},{}", c.std_error(n), c.c_entangled(n))?;
                }
                Ok(())
            })?;
        }
        let inv = report.invariants;
        write_file(dir, "invariants.csv", |w| {
            writeln!(w, "d,a1,a2,a3")?;
            writeln!(w, "{},{:.16e},{:.16e},{:.16e}", inv.d, inv.a1, inv.a2, inv.a3)
        })?;
        let mut json = serde_json::to_string_pretty(report).expect("report serializes");
        json.push('\n');
        write_atomic(&dir.join("identify.json"), json.as_bytes()).map_err(Failure::Output)?;
        write_atomic(&dir.join("summary.txt"), summary.as_bytes()).map_err(Failure::Output)?;
    }
    ctx.stdout.write_all(summary.as_bytes())?;
    Ok(())
}

fn write_file(dir: &Path, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), Failure> {
    let mut buf = Vec::new();
    fill(&mut buf)?;
    write_atomic(&dir.join(name), &buf).map_err(Failure::Output)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn cmd_scatdet(ctx: &mut Context<'_>, a: ScatdetArgs) -> Result<(), Failure> {
    if a.lambda_max <= a.lambda_min || a.n < 2 {
        return Err(Failure::Usage("need --lambda-max above --lambda-min and --n of at least 2".into()));
    }
    let grid = linspace(a.lambda_min, a.lambda_max, a.n);
    let direct = DirectDeterminant::new(a.d, a.rho, a.lmax, a.bc).map_err(at("direct"))?;
    let direct_at = |x: f64| direct.evaluate(Complex64::new(x, 0.0)).map(|v| v.value);
    let direct_values: Vec<Complex64> = grid
        .iter()
        .map(|&x| direct_at(x))
        .collect::<Result<_, _>>()
        .map_err(at("direct"))?;

    let mut fit = None;
    let mut product_values = Vec::new();
    if a.mode != DetMode::Direct {
        let set = ctx.resonances(a.d, a.rho, a.bc, a.lmax)?;
        let f = fit_constant_c(&set, &direct_at, &grid).map_err(at("fit"))?;
        let params = CanonicalProductParams::new(set, f.c);
        product_values = grid
            .iter()
            .map(|&x| det_s_product(&params, Complex64::new(x, 0.0)))
            .collect::<Result<_, _>>()
            .map_err(at("product"))?;
        fit = Some(f);
    }

    let mut header = vec!["lambda"];
    if a.mode != DetMode::Product {
        header.extend(["abs_direct", "arg_direct"]);
    }
    if a.mode != DetMode::Direct {
        header.extend(["abs_product", "arg_product"]);
    }
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .map(|i| {
            let mut row = vec![grid[i]];
            if a.mode != DetMode::Product {
                row.extend([direct_values[i].norm(), direct_values[i].arg()]);
            }
            if a.mode != DetMode::Direct {
                row.extend([product_values[i].norm(), product_values[i].arg()]);
            }
            row
        })
        .collect();
    let mut buf = Vec::new();
    write_numeric_csv(&mut buf, &header, &rows)?;
    ctx.emit(a.out.as_deref(), &buf)?;
    if let (DetMode::Both, Some(f)) = (a.mode, fit) {
        writeln!(ctx.stdout, "c = {:.16e}, residual = {:.3e}", f.c, f.residual)?;
    }
    Ok(())
}

fn cmd_wavetrace(ctx: &mut Context<'_>, a: WavetraceArgs) -> Result<(), Failure> {
    let times = match &a.times {
        Some(t) if !t.is_empty() => t.clone(),
        Some(_) => return Err(Failure::Usage("--times is empty".into())),
        None => {
            if !(a.tmax > a.tmin) || a.nt == 0 {
                return Err(Failure::Usage("need --tmax above --tmin and --nt of at least 1".into()));
            }
            linspace(a.tmin, a.tmax, a.nt)
        }
    };
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Failure::Usage("times must be finite".into()));
    }
    if a.eps.len() < 2 || a.eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) || a.eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Failure::Usage("--eps needs at least two positive, strictly decreasing widths".into()));
    }
    let eps_min = *a.eps.last().expect("checked nonempty");
    let l_max = a.lmax.unwrap_or_else(|| crate::wave::required_l_max(a.rho, eps_min));
    let set = ctx.resonances(a.d, a.rho, a.bc, l_max)?;
    let convention = match a.convention {
        ConventionArg::Decaying => WaveConvention::Decaying,
        ConventionArg::Literal => WaveConvention::Literal,
    };
    let table = singular_support_scan_with(&set, &times, &a.eps, convention).map_err(at("wave"))?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    ctx.emit(a.out.as_deref(), &buf)
}
