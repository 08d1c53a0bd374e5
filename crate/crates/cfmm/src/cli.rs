//! `cfmm derive | verify | simulate | plot`.
//!
//! Exit codes: 0 success, 1 a check failed on valid input, 2 bad input.

use std::io::Write;
use std::path::{Path, PathBuf};

use cfmm_core::closed_forms::{
    bs_covered_call_boundary, log_contract_boundary, perpetual_put_boundary, BsCoveredCallParams, LogContractParams,
    PerpetualPutParams,
};
use cfmm_core::conjugate::{GridSpec, TraceOptions, MEMBERSHIP_TOL};
use cfmm_core::sim::{PathSpec, PnLSummary};
use cfmm_core::verify::{relative_grid, ROUND_TRIP_BOUND};
use cfmm_core::{PriceVector, TradingSet};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::config::{FamilyName, PayoffSpec, SimConfig};
use crate::error::{Error, Result};
use crate::fmt::num;
use crate::io::{self, BoundaryMeta, GridMeta};
use crate::parallel;
use crate::pipeline::{boundary_points, construct, holdings, Construction, TraceSettings};
use crate::svg::{self, PlotOptions, Series};

#[derive(Debug, Parser)]
#[command(name = "cfmm", version, about = "Build and check CFMMs that replicate a given LP payoff")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct the trading set of a payoff and write its boundary as `R1,R2` CSV.
    Derive(DeriveArgs),
    /// Solve the forward problem on a price grid and compare with the payoff.
    Verify(VerifyArgs),
    /// Monte-Carlo PnL of the CFMM against rebalanced delta hedging.
    Simulate(SimulateArgs),
    /// Plot boundary CSVs, or a built-in figure, as SVG.
    Plot(PlotArgs),
}

/// Payoff selection. Flags override values from `--params`.
#[derive(Debug, Clone, Default, Args)]
pub struct PayoffArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// JSON file: a payoff `{family, params, n}` (for `simulate`, also a simulation config).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Constant-mean weight(s) of the `power` family.
    #[arg(long, value_delimiter = ',')]
    pub w: Vec<f64>,
    /// Holdings of the `linear` family, or the linear coefficient of `quadratic`.
    #[arg(long, value_delimiter = ',')]
    pub a: Vec<f64>,
    /// Log-contract constant.
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long, visible_alias = "K")]
    pub strike: Option<f64>,
    /// Volatility; for `simulate` also the volatility of the simulated price.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Time to expiry.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, visible_alias = "r")]
    pub rate: Option<f64>,
    /// Curvature `A` of the `quadratic` family.
    #[arg(long)]
    pub curvature: Option<f64>,
    /// Constant term of the `quadratic` family.
    #[arg(long)]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DeriveArgs {
    #[command(flatten)]
    pub payoff: PayoffArgs,
    /// Number of grid prices.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Adaptive refinement tolerance of the trace.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Relative price range `lo,hi` of the grid.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [1e-4, 1e4])]
    pub range: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Construction::Auto)]
    pub construction: Construction,
    /// CSV output; a `.meta.json` sidecar is written next to it. Prints to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub payoff: PayoffArgs,
    /// Number of log-spaced test prices.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Bound on the relative round-trip error.
    #[arg(long, default_value_t = ROUND_TRIP_BOUND)]
    pub tol: f64,
    /// Relative price range `lo,hi` of the test prices.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [1e-3, 1e3])]
    pub range: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Construction::Auto)]
    pub construction: Construction,
    /// Round-trip report CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub payoff: PayoffArgs,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Horizon `T`.
    #[arg(long, visible_alias = "T")]
    pub horizon: Option<f64>,
    /// Initial relative price.
    #[arg(long)]
    pub c0: Option<f64>,
    /// `auto` uses the closed form when the family has one.
    #[arg(long, value_enum, default_value_t = Construction::Auto)]
    pub construction: Construction,
    /// Per-path ledger CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Black-Scholes covered call, τ = 10, σ ∈ {0.05, 0.1, 0.2}.
    CoveredCallVol,
    /// Black-Scholes covered call, σ = 0.1, τ ∈ {1, 5, 10, 20}.
    CoveredCallTau,
    /// Perpetual put, r = 0.1, σ ∈ {0.15, 0.25, 0.4}.
    PutVol,
    /// Perpetual put, σ = 0.25, r ∈ {0.02, 0.05, 0.1, 0.2}.
    PutRate,
    /// Log contract, k ∈ {0, 1, 2}.
    LogContract,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Boundary CSV files (`R1,R2`).
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// SVG output; prints to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub title: Option<String>,
    /// Legend labels, one per input.
    #[arg(long, value_delimiter = ',')]
    pub labels: Vec<String>,
    #[arg(long)]
    pub xmax: Option<f64>,
    #[arg(long)]
    pub ymax: Option<f64>,
}

/// Runs a command, writing reports to `out`; returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> u8 {
    let result = match &cli.command {
        Command::Derive(a) => derive(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Plot(a) => plot(a, out),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(|e| Error::io("<stdout>", e))?
    };
}

fn uses(family: FamilyName) -> &'static [&'static str] {
    match family {
        FamilyName::Linear => &["a"],
        FamilyName::Quadratic => &["A", "a", "b"],
        FamilyName::Power => &["w"],
        FamilyName::CoveredCallExpiry => &["strike"],
        FamilyName::BsCoveredCall => &["strike", "sigma", "tau"],
        FamilyName::PerpetualPut => &["strike", "sigma", "rate"],
        FamilyName::LogContract => &["k"],
        FamilyName::CustomGrid => &["prices", "values"],
    }
}

fn list_value(xs: &[f64]) -> Value {
    if xs.len() == 1 {
        Value::from(xs[0])
    } else {
        Value::from(xs.to_vec())
    }
}

/// Merges flags into a payoff read from a file (if any).
fn payoff_spec(args: &PayoffArgs, from_file: Option<PayoffSpec>) -> Result<PayoffSpec> {
    let mut spec = match (args.family, from_file) {
        (Some(f), Some(file)) if file.family == f => file,
        (Some(f), _) => PayoffSpec::new(f),
        (None, Some(file)) => file,
        (None, None) => return Err(Error::config("no payoff given: pass --family or --params")),
    };
    let flags: [(&str, Option<Value>); 9] = [
        ("w", (!args.w.is_empty()).then(|| list_value(&args.w))),
        ("a", (!args.a.is_empty()).then(|| list_value(&args.a))),
        ("k", args.k.map(Value::from)),
        ("strike", args.strike.map(Value::from)),
        ("sigma", args.sigma.map(Value::from)),
        ("tau", args.tau.map(Value::from)),
        ("rate", args.rate.map(Value::from)),
        ("A", args.curvature.map(Value::from)),
        ("b", args.b.map(Value::from)),
    ];
    let used = uses(spec.family);
    for (key, value) in flags {
        if let Some(v) = value {
            if used.contains(&key) {
                spec.set(key, v);
            } else {
                log::debug!("`{}` does not take `{key}`; ignored", spec.family.as_str());
            }
        }
    }
    Ok(spec)
}

fn price_range(range: &[f64]) -> Result<(f64, f64)> {
    match range {
        [lo, hi] if *lo > 0.0 && hi > lo && hi.is_finite() => Ok((*lo, *hi)),
        _ => Err(Error::config(format!("--range needs 0 < lo < hi, got {range:?}"))),
    }
}

fn positive_tol(tol: f64) -> Result<f64> {
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(Error::config(format!("--tol must be positive, got {tol}")))
    }
}

fn grid_size(n: usize) -> Result<usize> {
    if n >= 2 {
        Ok(n)
    } else {
        Err(Error::config(format!("--grid needs at least 2 points, got {n}")))
    }
}

fn read_payoff(args: &PayoffArgs) -> Result<PayoffSpec> {
    let file = args.params.as_deref().map(PayoffSpec::from_file).transpose()?;
    payoff_spec(args, file)
}

fn derive(args: &DeriveArgs, out: &mut dyn Write) -> Result<bool> {
    let spec = read_payoff(&args.payoff)?;
    let (lo, hi) = price_range(&args.range)?;
    let grid = GridSpec { ratio_min: lo, ratio_max: hi, points: grid_size(args.grid)? };
    let trace = TraceSettings {
        grid,
        options: TraceOptions { refine_tol: positive_tol(args.tol)?, ..TraceOptions::default() },
    };
    let built = spec.build()?;
    if built.payoff.dim() != 2 {
        return Err(Error::config("boundary export needs a two-coin payoff; use `verify` for membership checks"));
    }
    let made = construct(&built, args.construction, &trace, false)?;
    let points = boundary_points(&made.set, &relative_grid(lo, hi, grid.points)?)?;
    if points.len() == 1 {
        log::warn!("the trading set is the single point {:?}: only the null trade is allowed", points[0]);
    }
    let csv = io::boundary_csv(&points);
    let Some(path) = &args.out else {
        out.write_all(csv.as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
        return Ok(true);
    };
    io::write(path, &csv)?;
    let mut tolerances = Map::new();
    tolerances.insert("refine_tol".into(), trace.options.refine_tol.into());
    tolerances.insert("merge_tol".into(), trace.options.merge_tol.into());
    tolerances.insert("monotone_tol".into(), trace.options.monotone_tol.into());
    tolerances.insert("membership_tol".into(), MEMBERSHIP_TOL.into());
    let meta = BoundaryMeta {
        family: spec.family.as_str().into(),
        params: spec.params.clone(),
        n: 2,
        construction: made.construction.into(),
        grid: (made.construction == "traced").then_some(GridMeta { ratio_min: lo, ratio_max: hi, points: grid.points }),
        tolerances,
        rows: points.len(),
    };
    let meta_path = io::meta_path(path);
    io::write(&meta_path, &meta.to_json())?;
    say!(out, "construction: {}", made.construction);
    say!(out, "wrote {} boundary points to {}", points.len(), path.display());
    say!(out, "metadata: {}", meta_path.display());
    Ok(true)
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<bool> {
    let spec = read_payoff(&args.payoff)?;
    let bound = positive_tol(args.tol)?;
    let (lo, hi) = price_range(&args.range)?;
    let n = grid_size(args.grid)?;
    let built = spec.build()?;
    let made = construct(&built, args.construction, &TraceSettings::default(), false)?;
    let dim = built.payoff.dim();
    let grid: Vec<PriceVector> = relative_grid(lo, hi, n)?
        .into_iter()
        .map(|c| {
            let mut v = c.into_inner();
            v.resize(dim, 1.0);
            PriceVector::new(v)
        })
        .collect::<cfmm_core::Result<_>>()?;
    let report = parallel::round_trip(built.payoff.as_ref(), &made.set, &grid, bound);
    if let Some(path) = &args.out {
        io::write(path, &io::round_trip_csv(&report))?;
    }
    say!(out, "family: {}", spec.family.as_str());
    say!(out, "construction: {}", made.construction);
    say!(out, "prices: {n} in [{}, {}]", num(lo), num(hi));
    say!(out, "max_rel_error: {}", num(report.max_rel_error));
    say!(out, "bound: {}", num(report.bound));
    say!(out, "result: {}", if report.pass { "PASS" } else { "FAIL" });
    if !report.pass {
        let failures: Vec<_> = report.failures().collect();
        say!(out, "{} prices fail; forward value minus payoff:", failures.len());
        say!(out, "{:>18} {:>18} {:>18} {:>18} {:>18}", "c1", "target", "forward", "gap", "rel_error");
        for row in failures.iter().take(20) {
            say!(
                out,
                "{:>18} {:>18} {:>18} {:>18} {:>18}",
                num(row.c[0]),
                num(row.target),
                num(row.forward),
                num(row.forward - row.target),
                num(row.rel_error)
            );
        }
        if failures.len() > 20 {
            say!(out, "... and {} more", failures.len() - 20);
        }
    }
    Ok(report.pass)
}

/// A `--params` file for `simulate`: a full simulation config, or just a payoff.
fn read_sim_config(path: &Path) -> Result<(SimConfig, Option<PayoffSpec>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: Value = serde_json::from_str(&text)?;
    if value.get("family").is_some() {
        let spec: PayoffSpec = serde_json::from_value(value)?;
        let empty = SimConfig { sigma: None, horizon: None, steps: None, paths: None, seed: None, c0: None, set: None };
        return Ok((empty, Some(spec.canonical())));
    }
    let cfg: SimConfig = serde_json::from_value(value)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let payoff = cfg.payoff(base)?;
    Ok((cfg, payoff))
}

fn print_summary(out: &mut dyn Write, name: &str, s: &PnLSummary) -> Result<()> {
    let opt = |x: Option<f64>| x.map(num).unwrap_or_else(|| "n/a".into());
    say!(
        out,
        "{name:<12} mean_pnl {}  std_error {}  theoretical {}  z_score {}",
        num(s.mean_pnl),
        num(s.std_error),
        opt(s.theoretical),
        opt(s.z_score)
    );
    Ok(())
}

/// Largest accepted |z| against a theoretical mean.
pub const Z_LIMIT: f64 = 3.0;

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<bool> {
    let (cfg, file_payoff) = match &args.payoff.params {
        Some(p) => read_sim_config(p)?,
        None => {
            (SimConfig { sigma: None, horizon: None, steps: None, paths: None, seed: None, c0: None, set: None }, None)
        }
    };
    let spec = payoff_spec(&args.payoff, file_payoff)?;
    let paths = PathSpec {
        sigma: args.payoff.sigma.or(cfg.sigma).unwrap_or(0.2),
        horizon: args.horizon.or(cfg.horizon).unwrap_or(1.0),
        steps: args.steps.or(cfg.steps).unwrap_or(100),
        paths: args.paths.or(cfg.paths).unwrap_or(10_000),
        seed: args.seed.or(cfg.seed).unwrap_or(42),
        c0: args.c0.or(cfg.c0).unwrap_or(1.0),
    };
    paths.validate()?;
    let built = spec.build()?;
    if built.payoff.dim() != 2 {
        return Err(Error::config("simulation needs a two-coin payoff"));
    }
    let made = construct(&built, args.construction, &TraceSettings::default(), true)?;
    let hedge = holdings(&built.payoff);
    let (stats, records) = parallel::simulate(&made.set, Some(&hedge), &paths)?;
    if let Some(path) = &args.out {
        io::write(path, &io::ledger_csv(&records))?;
    }
    say!(out, "family: {}  construction: {}", spec.family.as_str(), made.construction);
    say!(
        out,
        "sigma {}  T {}  steps {}  paths {}  seed {}  c0 {}",
        num(paths.sigma),
        num(paths.horizon),
        paths.steps,
        paths.paths,
        paths.seed,
        num(paths.c0)
    );
    say!(out, "excluded paths: {}", stats.cfmm.excluded);
    print_summary(out, "cfmm", &stats.cfmm)?;
    print_summary(out, "rebalancing", &stats.rebalancing)?;
    say!(
        out,
        "{:<12} mean {}  std_error {}  paired_variance {}  unpaired_variance {}",
        "gap",
        num(stats.mean_gap),
        num(stats.gap_std_error),
        num(stats.paired_variance),
        num(stats.unpaired_variance)
    );
    let pass = stats.cfmm.within(Z_LIMIT) && stats.rebalancing.within(Z_LIMIT);
    say!(out, "result: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn sample_curve(set: &TradingSet, lo: f64, hi: f64, samples: usize) -> Vec<(f64, f64)> {
    let curve = set.curve().expect("closed-form curve");
    (0..=samples)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / samples as f64;
            (x, curve.height(x))
        })
        .collect()
}

fn preset_series(preset: Preset) -> Result<(Vec<Series>, PlotOptions)> {
    let series =
        |label: String, set: TradingSet, lo: f64, hi: f64| Series { label, points: sample_curve(&set, lo, hi, 400) };
    let unit = |title: &str| PlotOptions {
        title: title.into(),
        x_range: Some((0.0, 1.0)),
        y_range: Some((0.0, 1.0)),
        ..PlotOptions::default()
    };
    Ok(match preset {
        Preset::CoveredCallVol => {
            let s = [0.05, 0.1, 0.2]
                .into_iter()
                .map(|sigma| {
                    Ok(series(
                        format!("σ = {sigma}"),
                        bs_covered_call_boundary(&BsCoveredCallParams::new(1.0, sigma, 10.0)?),
                        0.0,
                        1.0,
                    ))
                })
                .collect::<Result<_>>()?;
            (s, unit("Covered call, K = 1, τ = 10"))
        }
        Preset::CoveredCallTau => {
            let s = [1.0, 5.0, 10.0, 20.0]
                .into_iter()
                .map(|tau| {
                    Ok(series(
                        format!("τ = {tau}"),
                        bs_covered_call_boundary(&BsCoveredCallParams::new(1.0, 0.1, tau)?),
                        0.0,
                        1.0,
                    ))
                })
                .collect::<Result<_>>()?;
            (s, unit("Covered call, K = 1, σ = 0.1"))
        }
        Preset::PutVol => {
            let s = [0.15, 0.25, 0.4]
                .into_iter()
                .map(|sigma| {
                    Ok(series(
                        format!("σ = {sigma}"),
                        perpetual_put_boundary(&PerpetualPutParams::new(1.0, sigma, 0.1)?),
                        0.0,
                        1.0,
                    ))
                })
                .collect::<Result<_>>()?;
            (s, unit("Perpetual put, K = 1, r = 0.1"))
        }
        Preset::PutRate => {
            let s = [0.02, 0.05, 0.1, 0.2]
                .into_iter()
                .map(|rate| {
                    Ok(series(
                        format!("r = {rate}"),
                        perpetual_put_boundary(&PerpetualPutParams::new(1.0, 0.25, rate)?),
                        0.0,
                        1.0,
                    ))
                })
                .collect::<Result<_>>()?;
            (s, unit("Perpetual put, K = 1, σ = 0.25"))
        }
        Preset::LogContract => {
            let s = [0.0, 1.0, 2.0]
                .into_iter()
                .map(|k: f64| {
                    let hi = k.exp();
                    Ok(series(format!("k = {k}"), log_contract_boundary(&LogContractParams::new(k)?), hi * 1e-3, hi))
                })
                .collect::<Result<_>>()?;
            let opts = PlotOptions {
                title: "Log contract".into(),
                x_range: Some((0.0, 8.0)),
                y_range: Some((0.0, 5.0)),
                ..PlotOptions::default()
            };
            (s, opts)
        }
    })
}

fn plot(args: &PlotArgs, out: &mut dyn Write) -> Result<bool> {
    if args.inputs.is_empty() && args.preset.is_none() {
        return Err(Error::config("nothing to plot: pass boundary CSV files or --preset"));
    }
    if !args.labels.is_empty() && args.labels.len() != args.inputs.len() {
        return Err(Error::config(format!("{} labels for {} inputs", args.labels.len(), args.inputs.len())));
    }
    let (mut series, mut opts) = match args.preset {
        Some(p) => preset_series(p)?,
        None => (Vec::new(), PlotOptions::default()),
    };
    for (i, path) in args.inputs.iter().enumerate() {
        let points = io::read_boundary_csv(path)?;
        let label = match args.labels.get(i) {
            Some(l) => l.clone(),
            None => match BoundaryMeta::read(&io::meta_path(path)) {
                Ok(meta) => meta.label(),
                Err(_) => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            },
        };
        series.push(Series { label, points });
    }
    if let Some(t) = &args.title {
        opts.title = t.clone();
    }
    if let Some(xmax) = args.xmax {
        opts.x_range = Some((opts.x_range.map_or(0.0, |r| r.0), xmax));
    }
    if let Some(ymax) = args.ymax {
        opts.y_range = Some((opts.y_range.map_or(0.0, |r| r.0), ymax));
    }
    let svg = svg::render(&series, &opts);
    match &args.out {
        Some(path) => {
            io::write(path, &svg)?;
            say!(out, "wrote {} curves to {}", series.len(), path.display());
        }
        None => out.write_all(svg.as_bytes()).map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(true)
}
