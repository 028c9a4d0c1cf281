//! Command-line front end: `trace`, `bounds`, `verify` and `plot`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{self, BoundProfile};
use crate::driving::{load_samples_csv, make_driver, Driver, DrivingFunction, Family};
use crate::error::{Error, Result};
use crate::flow::{trace_curve, SolverOptions, TracedCurve};
use crate::plot::render_svg;
use crate::verify::{run_suite, with_thread_cap, SweepConfig};

#[derive(Debug, Parser)]
#[command(
    name = "loewner",
    version,
    about = "Loewner curves for Lip-1/2 drivers, their cone and regularity bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace the curve at evenly spaced times in (0, t-max].
    Trace(TraceArgs),
    /// Tabulate the closed-form bounds over a σ grid.
    Bounds(BoundsArgs),
    /// Run the verification suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Draw the traced curve and its cone as SVG.
    Plot(TraceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Args)]
pub struct DriverArgs {
    /// sqrt, sqrt_backward (spiral), constant, random, piecewise_linear, sampled.
    #[arg(long, default_value = "sqrt")]
    pub family: String,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Horizon; defaults to 1, or to the last sample time with --driver-csv.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Driver samples, CSV with header `t,lambda`.
    #[arg(long)]
    pub driver_csv: Option<PathBuf>,
    /// Seed of the random family.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Steps of the random family.
    #[arg(long, default_value_t = 512)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Substep tolerance: steps satisfy δs ≤ tol·Y²/4 [default: 1e-3].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Fixed tip height [default: 1e-4·√t].
    #[arg(long)]
    pub y_tip: Option<f64>,
    /// Disable tip extrapolation.
    #[arg(long)]
    pub no_richardson: bool,
    /// Integrate drivers with seminorm ≥ 4.
    #[arg(long)]
    pub allow_supercritical: bool,
}

impl SolverArgs {
    fn apply(&self, mut o: SolverOptions) -> SolverOptions {
        if let Some(t) = self.tol {
            o.tol = t;
        }
        if self.y_tip.is_some() {
            o.y_tip = self.y_tip;
        }
        if self.no_richardson {
            o.richardson = false;
        }
        o.allow_supercritical |= self.allow_supercritical;
        o
    }
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub driver: DriverArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Output file; stdout without it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to the output extension, else csv (svg for plot).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// `start:stop:step`, endpoints included within half a step.
    #[arg(long, conflicts_with = "sigma")]
    pub sigma_grid: Option<String>,
    /// A single σ.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `default` or a JSON sweep configuration.
    #[arg(long, default_value = "default")]
    pub config: String,
    /// Report destination; only the summary is printed without it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Base seed of the random drivers.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub allow_supercritical: bool,
}

enum Failure {
    Usage(String),
    Run(Error),
    Verification(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

/// Parse `argv` (including the program name) and run. Returns the process
/// exit code: 0 on success, 1 on run-time or verification failure, 2 on
/// usage errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match with_thread_cap(|| execute(cli)) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(Failure::Verification(n)) => {
            eprintln!("verification failed: {n} check(s) failed");
            1
        }
    }
}

fn execute(cli: Cli) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::Trace(a) => {
            let format = pick_format(a.format, a.out.as_deref(), &[Format::Csv, Format::Json])?;
            let (_, curve) = trace(&a)?;
            write_output(a.out.as_deref(), |w| match format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut *w, &curve)?;
                    writeln!(w)?;
                    Ok(())
                }
                _ => curve.write_csv(w),
            })?;
        }
        Command::Plot(a) => {
            pick_format(a.format, a.out.as_deref(), &[Format::Svg])?;
            let (driver, curve) = trace(&a)?;
            let sigma = driver.sigma();
            let cone = if sigma == 0.0 {
                Some(0.0)
            } else if sigma < 4.0 {
                Some(bounds::cone_bound(sigma)?.m)
            } else {
                None
            };
            let title = format!("{} σ = {sigma}", driver.family());
            let svg = render_svg(&curve, cone, &title);
            write_output(a.out.as_deref(), |w| Ok(w.write_all(svg.as_bytes())?))?;
        }
        Command::Bounds(a) => {
            let format = pick_format(a.format, a.out.as_deref(), &[Format::Csv, Format::Json])?;
            let sigmas = match (&a.sigma_grid, a.sigma) {
                (Some(g), _) => parse_grid(g).map_err(Failure::Usage)?,
                (None, Some(s)) => vec![s],
                (None, None) => parse_grid("0.25:3.75:0.25").map_err(Failure::Usage)?,
            };
            let profiles = sigmas
                .iter()
                .map(|&s| BoundProfile::new(s))
                .collect::<Result<Vec<_>>>()?;
            write_output(a.out.as_deref(), |w| match format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut *w, &profiles)?;
                    writeln!(w)?;
                    Ok(())
                }
                _ => bounds::write_profiles_csv(&profiles, w),
            })?;
        }
        Command::Verify(a) => {
            let format = pick_format(a.format, a.out.as_deref(), &[Format::Json, Format::Csv])?;
            let mut cfg = SweepConfig::load(&a.config)?;
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            if let Some(t) = a.tol {
                cfg.solver.tol = t;
            }
            cfg.allow_supercritical |= a.allow_supercritical;
            let report = run_suite(&cfg)?;
            if let Some(path) = a.out.as_deref() {
                write_output(Some(path), |w| match format {
                    Format::Csv => report.write_csv(w),
                    _ => {
                        w.write_all(report.to_json()?.as_bytes())?;
                        writeln!(w)?;
                        Ok(())
                    }
                })?;
            }
            let mut stdout = io::stdout().lock();
            for (check, pass, fail, inc) in report.summary() {
                let _ = writeln!(
                    stdout,
                    "{check:<28} pass {pass:>5}  fail {fail:>4}  inconclusive {inc:>4}"
                );
            }
            for e in report.failures().take(20) {
                let _ = writeln!(
                    stdout,
                    "FAIL {} at {}: measured {:e}, bound {:?}",
                    e.check, e.point, e.measured, e.bound
                );
            }
            let failed = report.failures().count();
            if failed > 0 {
                return Err(Failure::Verification(failed));
            }
        }
    }
    Ok(())
}

fn build_driver(a: &DriverArgs) -> Result<Driver> {
    if let Some(path) = &a.driver_csv {
        let samples =
            load_samples_csv(path).map_err(|e| e.context(format!("reading {}", path.display())))?;
        let family = match a.family.parse::<Family>() {
            Ok(f @ (Family::PiecewiseLinear | Family::Sampled)) => f,
            _ => Family::PiecewiseLinear,
        };
        let horizon = samples.last().map_or(0.0, |s| s.0);
        return make_driver(family, a.sigma, horizon, Some(&samples));
    }
    let horizon = a.t_max.unwrap_or(1.0);
    if a.family.eq_ignore_ascii_case("random") {
        return Driver::random_walk(a.sigma, horizon, a.steps, a.seed);
    }
    make_driver(a.family.parse()?, a.sigma, horizon, None)
}

fn trace(a: &TraceArgs) -> std::result::Result<(Driver, TracedCurve), Failure> {
    if a.samples == 0 {
        return Err(Failure::Usage("--samples must be positive".into()));
    }
    let driver = build_driver(&a.driver)?;
    let t_max = a.driver.t_max.unwrap_or(driver.horizon());
    let opts = a.solver.apply(SolverOptions::default());
    let n = a.samples;
    let times: Vec<f64> = (1..=n)
        .map(|i| {
            if i == n {
                t_max
            } else {
                t_max * i as f64 / n as f64
            }
        })
        .collect();
    let curve = trace_curve(&driver, &times, &opts)?;
    Ok((driver, curve))
}

/// Explicit format if given, else inferred from the output extension, else
/// the first allowed one.
fn pick_format(
    explicit: Option<Format>,
    out: Option<&Path>,
    allowed: &[Format],
) -> std::result::Result<Format, Failure> {
    let inferred = out
        .and_then(|p| p.extension())
        .and_then(|e| e.to_str())
        .and_then(|e| match e.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "svg" => Some(Format::Svg),
            _ => None,
        });
    match explicit {
        Some(f) if allowed.contains(&f) => Ok(f),
        Some(f) => Err(Failure::Usage(format!(
            "format {f:?} is not available for this command (allowed: {allowed:?})"
        ))),
        None => Ok(inferred
            .filter(|f| allowed.contains(f))
            .unwrap_or(allowed[0])),
    }
}

/// `start:stop:step` with `step > 0`; `stop` is included if it lies within
/// half a step of a grid point.
pub fn parse_grid(spec: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid `{spec}` is not of the form start:stop:step"));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{s}` in grid `{spec}` is not a number"))
    };
    let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(format!("grid `{spec}` needs step > 0 and start ≤ stop"));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize;
    Ok((0..=count).map(|k| start + k as f64 * step).collect())
}

fn write_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Error::from(e).context(format!("creating {}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.5:3.5:0.5").unwrap().len(), 7);
        let g = parse_grid("0:1:0.3").unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[3] - 0.9).abs() < 1e-12);
        assert_eq!(parse_grid("0:1.1:0.25").unwrap().len(), 5);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a:1:0.1").is_err());
    }

    #[test]
    fn format_selection() {
        let p = Path::new("x.json");
        assert!(matches!(
            pick_format(None, Some(p), &[Format::Csv, Format::Json]),
            Ok(Format::Json)
        ));
        assert!(matches!(
            pick_format(None, None, &[Format::Csv, Format::Json]),
            Ok(Format::Csv)
        ));
        assert!(matches!(
            pick_format(Some(Format::Svg), None, &[Format::Csv]),
            Err(Failure::Usage(_))
        ));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["loewner", "--bogus"]), 2);
        assert_eq!(run(["loewner", "trace", "--nope"]), 2);
        assert_eq!(run(["loewner", "bounds", "--sigma-grid", "1:0:1"]), 2);
        assert_eq!(
            run(["loewner", "plot", "--format", "csv", "--samples", "2"]),
            2
        );
    }

    #[test]
    fn runtime_errors_exit_one() {
        assert_eq!(run(["loewner", "bounds", "--sigma", "5"]), 1);
        assert_eq!(
            run([
                "loewner",
                "trace",
                "--driver-csv",
                "/nonexistent/driver.csv"
            ]),
            1
        );
        assert_eq!(
            run(["loewner", "trace", "--sigma", "4.5", "--samples", "2"]),
            1
        );
    }
}
