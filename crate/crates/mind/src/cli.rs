//! Command-line driver: calibration, estimation and the experiment
//! harnesses behind one reproducible interface.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 finished with a solver
//! warning. Every run echoes its configuration into the output for
//! provenance, and every command is deterministic given `--seed`
//! (independently of `--threads`).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{MindError, Result};
use crate::experiments::{
    run_comparison, run_risk_study, GammaRule, NoiseScale, RiskStudyConfig, TestSignal,
};
use crate::grid::GridSignal;
use crate::io;
use crate::multiscale::SystemKind;
use crate::rng::gaussian_vector;
use crate::solvers::{solve_mind_with_gamma, MindConfig};
use crate::spline::{distance_function, DistanceTarget};
use crate::threshold::{estimate_sigma, GammaCacheEntry, ThresholdRule};
use crate::IntervalSystem;

#[derive(Parser, Debug)]
#[command(name = "mind", version, about = "Multiscale-constrained nonparametric regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for Monte-Carlo replicates (output does not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate a signal from a noisy CSV input.
    Estimate(EstimateArgs),
    /// Calibrate the constraint radius as a Monte-Carlo quantile.
    Quantile(QuantileArgs),
    /// Generate a noisy test-signal observation.
    Simulate(SimulateArgs),
    /// Monte-Carlo convergence-rate study with log-log slope fit.
    Rates(RatesArgs),
    /// Compare MIND with smoothing-spline and Nemirovski baselines.
    Compare(CompareArgs),
    /// Sample the multiscale distance function of a test signal.
    Distance(DistanceArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct EstimateArgs {
    /// Input CSV (header `value`, one float per line).
    #[arg(long)]
    pub input: PathBuf,
    /// Output CSV for the estimate.
    #[arg(long)]
    pub output: PathBuf,
    /// Where to write the solver report JSON (default: <output>.report.json).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Smoothness order of the regularizer.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Interval system: all, dyadic, or partition:m.
    #[arg(long, default_value = "partition:2")]
    pub system: String,
    /// Constraint radius; overrides --alpha.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Significance level for quantile calibration.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Noise scale; estimated from first differences when omitted.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Monte-Carlo runs for quantile calibration.
    #[arg(long, default_value_t = 10_000)]
    pub mc_runs: usize,
    /// Initial ADMM penalty parameter.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// ADMM iteration cap.
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for cached quantile calibrations (or MIND_CACHE_DIR).
    #[arg(long)]
    pub gamma_cache: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct QuantileArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value = "partition:2")]
    pub system: String,
    #[arg(long, default_value_t = 10_000)]
    pub mc_runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for cached calibrations (or MIND_CACHE_DIR).
    #[arg(long)]
    pub gamma_cache: Option<PathBuf>,
    /// Optional JSON output path (the result is also printed).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    /// bumps, heavisine, doppler, blocks, or sine:f.
    #[arg(long)]
    pub signal: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub sigma: f64,
    /// Interpret --sigma as a multiple of the signal's L2 norm.
    #[arg(long, default_value_t = false)]
    pub relative: bool,
    /// Rescale the truth to this L2 norm before adding noise.
    #[arg(long)]
    pub normalize_l2: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV for the noisy observation.
    #[arg(long)]
    pub output: PathBuf,
    /// Optional CSV for the noiseless truth.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct RatesArgs {
    #[arg(long, default_value = "sine:1")]
    pub signal: String,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Loss exponent q.
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Comma-separated grid sizes (small preset by default).
    #[arg(long, default_value = "128,256,512,1024")]
    pub n_list: String,
    #[arg(long, default_value_t = 10)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Fixed radius; overrides --alpha.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value = "partition:2")]
    pub system: String,
    #[arg(long, default_value_t = 2000)]
    pub mc_runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Also emit a log-log SVG plot.
    #[arg(long, default_value_t = false)]
    pub svg: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    #[arg(long, default_value_t = 2048)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Noise level relative to the (unit) signal norm.
    #[arg(long, default_value_t = 0.12)]
    pub sigma_rel: f64,
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    #[arg(long, default_value_t = 10_000)]
    pub mc_runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "partition:2")]
    pub system: String,
    #[arg(long, default_value = "bumps,heavisine,doppler")]
    pub signals: String,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct DistanceArgs {
    #[arg(long, default_value = "sine:1")]
    pub signal: String,
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, default_value = "partition:2")]
    pub system: String,
    /// Largest dual-norm budget sampled.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 16)]
    pub t_steps: usize,
    /// Radius used for the bias-variance split point.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Output CSV (t, d, d + sqrt(gamma t)).
    #[arg(long)]
    pub output: PathBuf,
}

/// Dispatch a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(MindError::Parameter("--threads must be >= 1".into()));
        }
        // ignore failure when a pool exists already (tests share a process)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Quantile(args) => cmd_quantile(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Rates(args) => cmd_rates(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Distance(args) => cmd_distance(args),
    }
}

fn cache_dir(flag: &Option<PathBuf>) -> Option<PathBuf> {
    flag.clone().or_else(|| std::env::var_os("MIND_CACHE_DIR").map(PathBuf::from))
}

fn cache_file(dir: &Path, entry: &GammaCacheEntry) -> PathBuf {
    let system = entry.system.replace(':', "-");
    dir.join(format!(
        "gamma_n{}_{}_sigma{}_alpha{}_mc{}_seed{}.json",
        entry.n, system, entry.sigma, entry.alpha, entry.mc_runs, entry.seed
    ))
}

/// Quantile calibration with an optional JSON file cache; returns the
/// radius and whether it came from the cache.
fn quantile_cached(
    kind: SystemKind,
    n: usize,
    sigma: f64,
    alpha: f64,
    mc_runs: usize,
    seed: u64,
    dir: Option<PathBuf>,
) -> Result<(f64, bool)> {
    let mut entry = GammaCacheEntry {
        n,
        system: kind.label(),
        sigma,
        alpha,
        mc_runs,
        seed,
        gamma: 0.0,
    };
    if let Some(dir) = &dir {
        let path = cache_file(dir, &entry);
        if path.is_file() {
            let text = std::fs::read_to_string(&path)?;
            let cached: GammaCacheEntry =
                serde_json::from_str(&text).map_err(|e| MindError::Parse(format!("{}: {e}", path.display())))?;
            let key_matches = cached.n == n
                && cached.system == entry.system
                && cached.sigma == sigma
                && cached.alpha == alpha
                && cached.mc_runs == mc_runs
                && cached.seed == seed;
            if key_matches {
                eprintln!("gamma cache hit: {}", path.display());
                return Ok((cached.gamma, true));
            }
        }
    }
    let sys = IntervalSystem::new(kind, n)?;
    let rule = ThresholdRule::quantile(alpha, mc_runs, seed, sigma);
    let gamma = rule.resolve(&sys, 1)?;
    entry.gamma = gamma;
    if let Some(dir) = &dir {
        std::fs::create_dir_all(dir)?;
        let path = cache_file(dir, &entry);
        std::fs::write(&path, serde_json::to_string_pretty(&entry).map_err(|e| MindError::Parse(e.to_string()))?)?;
    }
    Ok((gamma, false))
}

fn cmd_estimate(args: EstimateArgs) -> Result<i32> {
    if !args.input.is_file() {
        return Err(MindError::Parameter(format!(
            "input file not found: {}",
            args.input.display()
        )));
    }
    let system = SystemKind::parse(&args.system)?;
    let values = io::read_signal_csv(&args.input)?;
    let y = GridSignal::from_values(values)?;
    let n = y.n();
    let sys = IntervalSystem::new(system, n)?;

    let gamma = match (args.gamma, args.alpha) {
        (Some(g), _) => {
            if g <= 0.0 {
                return Err(MindError::Parameter(format!("--gamma must be positive, got {g}")));
            }
            g
        }
        (None, Some(alpha)) => {
            let sigma = match args.sigma {
                Some(s) => s,
                None => {
                    let est = estimate_sigma(&y);
                    eprintln!("sigma estimated from first differences: {est:.6}");
                    est
                }
            };
            if sigma <= 0.0 {
                return Err(MindError::Parameter(
                    "noise scale must be positive (set --sigma explicitly)".into(),
                ));
            }
            quantile_cached(system, n, sigma, alpha, args.mc_runs, args.seed, cache_dir(&args.gamma_cache))?.0
        }
        (None, None) => {
            return Err(MindError::Parameter(
                "either --gamma or --alpha must be given".into(),
            ))
        }
    };

    let mut cfg = MindConfig::new(args.k, system, ThresholdRule::fixed(gamma));
    cfg.admm.rho = args.rho;
    cfg.admm.max_iter = args.max_iter;
    let report = solve_mind_with_gamma(&y, &cfg, &sys, gamma)?;

    io::write_signal_csv(&args.output, report.estimate.values())?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| args.output.with_extension("report.json"));
    #[derive(Serialize)]
    struct EstimateOutput<'a> {
        schema: u32,
        config: &'a EstimateArgs,
        gamma_used: f64,
        iterations: usize,
        primal_residual: f64,
        dual_residual: f64,
        constraint_violation: f64,
        objective: f64,
        warning: bool,
        estimate_csv: String,
    }
    let out = EstimateOutput {
        schema: 1,
        config: &args,
        gamma_used: report.gamma_used,
        iterations: report.iterations,
        primal_residual: report.primal_residual,
        dual_residual: report.dual_residual,
        constraint_violation: report.constraint_violation,
        objective: report.objective,
        warning: report.warning,
        estimate_csv: args.output.display().to_string(),
    };
    std::fs::write(
        &report_path,
        serde_json::to_string_pretty(&out).map_err(|e| MindError::Parse(e.to_string()))?,
    )?;
    if report.warning {
        eprintln!("warning: solver hit the iteration cap; see {}", report_path.display());
        return Ok(2);
    }
    Ok(0)
}

fn cmd_quantile(args: QuantileArgs) -> Result<i32> {
    let system = SystemKind::parse(&args.system)?;
    if !(0.0 < args.alpha && args.alpha < 1.0) {
        return Err(MindError::Parameter(format!("--alpha must be in (0,1), got {}", args.alpha)));
    }
    let (gamma, cache_hit) = quantile_cached(
        system,
        args.n,
        args.sigma,
        args.alpha,
        args.mc_runs,
        args.seed,
        cache_dir(&args.gamma_cache),
    )?;
    #[derive(Serialize)]
    struct QuantileOutput<'a> {
        schema: u32,
        config: &'a QuantileArgs,
        gamma: f64,
        cache_hit: bool,
    }
    let out = QuantileOutput { schema: 1, config: &args, gamma, cache_hit };
    let json = serde_json::to_string_pretty(&out).map_err(|e| MindError::Parse(e.to_string()))?;
    if let Some(path) = &args.output {
        std::fs::write(path, &json)?;
    }
    println!("{json}");
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let signal = TestSignal::parse(&args.signal)?;
    let truth = match args.normalize_l2 {
        Some(t) => crate::experiments::generate_signal_normalized(signal, args.n, t)?,
        None => crate::experiments::generate_signal(signal, args.n)?,
    };
    let noise_scale = if args.relative {
        NoiseScale::RelativeL2(args.sigma)
    } else {
        NoiseScale::Absolute(args.sigma)
    };
    let sigma = noise_scale.resolve(&truth)?;
    let noise = gaussian_vector(args.seed, 0, args.n, sigma);
    let y: Vec<f64> = truth.values().iter().zip(&noise).map(|(f, e)| f + e).collect();
    io::write_signal_csv(&args.output, &y)?;
    if let Some(tpath) = &args.truth {
        io::write_signal_csv(tpath, truth.values())?;
    }
    eprintln!("wrote {} samples with sigma = {sigma:.6}", args.n);
    Ok(0)
}

fn parse_n_list(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(
            part.parse()
                .map_err(|_| MindError::Parameter(format!("bad grid size in --n-list: {part:?}")))?,
        );
    }
    if out.is_empty() {
        return Err(MindError::Parameter("--n-list must name at least one grid size".into()));
    }
    Ok(out)
}

fn cmd_rates(args: RatesArgs) -> Result<i32> {
    let signal = TestSignal::parse(&args.signal)?;
    let system = SystemKind::parse(&args.system)?;
    let n_list = parse_n_list(&args.n_list)?;
    let gamma_rule = match args.gamma {
        Some(g) => GammaRule::Fixed { gamma: g },
        None => GammaRule::QuantileAlpha { alpha: args.alpha, mc_runs: args.mc_runs },
    };
    let cfg = RiskStudyConfig {
        signal,
        normalize_l2: None,
        k: args.k,
        system,
        gamma_rule,
        n_list,
        replicates: args.replicates,
        noise: NoiseScale::Absolute(args.sigma),
        seed: args.seed,
        q_list: vec![args.q],
    };
    let report = run_risk_study(&cfg)?;
    std::fs::create_dir_all(&args.out_dir)?;
    std::fs::write(
        args.out_dir.join("rates.json"),
        serde_json::to_string_pretty(&report).map_err(|e| MindError::Parse(e.to_string()))?,
    )?;
    let mut csv = String::from("n,sigma,gamma,q,mean_loss,stderr,mean_iterations,warnings\n");
    for row in &report.rows {
        for loss in &row.losses {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                row.n, row.sigma, row.gamma, loss.q, loss.mean, loss.stderr, row.mean_iterations, row.solver_warnings
            ));
        }
    }
    std::fs::write(args.out_dir.join("rates.csv"), csv)?;
    if args.svg {
        let xs: Vec<f64> = report.rows.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = report.rows.iter().map(|r| r.losses[0].mean).collect();
        let svg = loglog_svg("mean loss vs n", &xs, &ys);
        std::fs::write(args.out_dir.join("rates.svg"), svg)?;
    }
    for fit in &report.slopes {
        println!(
            "q={}: fitted slope {:.4} (95% CI +/- {:.4})",
            fit.q, fit.slope, fit.ci_half_width
        );
    }
    let warned = report.rows.iter().any(|r| r.solver_warnings > 0);
    Ok(if warned { 2 } else { 0 })
}

fn cmd_compare(args: CompareArgs) -> Result<i32> {
    let system = SystemKind::parse(&args.system)?;
    let mut signals = Vec::new();
    for part in args.signals.split(',') {
        let part = part.trim();
        if !part.is_empty() {
            signals.push(TestSignal::parse(part)?);
        }
    }
    if signals.is_empty() {
        return Err(MindError::Parameter("--signals must name at least one signal".into()));
    }
    let report = run_comparison(
        &signals,
        args.n,
        args.k,
        args.alpha,
        args.sigma_rel,
        args.replicates,
        args.mc_runs,
        args.seed,
        system,
    )?;
    std::fs::create_dir_all(&args.out_dir)?;
    std::fs::write(
        args.out_dir.join("compare.json"),
        serde_json::to_string_pretty(&report).map_err(|e| MindError::Parse(e.to_string()))?,
    )?;
    let mut csv =
        String::from("signal,mind_mean,mind_stderr,ss_mean,ss_stderr,nem_mean,nem_stderr\n");
    for row in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.signal,
            row.mind.mean,
            row.mind.stderr,
            row.smoothing_spline.mean,
            row.smoothing_spline.stderr,
            row.nemirovski.mean,
            row.nemirovski.stderr
        ));
    }
    std::fs::write(args.out_dir.join("compare.csv"), csv)?;
    for row in &report.rows {
        println!(
            "{}: mind {:.5}  ss(best-of-grid) {:.5}  nem(oracle) {:.5}",
            row.signal, row.mind.mean, row.smoothing_spline.mean, row.nemirovski.mean
        );
    }
    Ok(0)
}

fn cmd_distance(args: DistanceArgs) -> Result<i32> {
    let signal = TestSignal::parse(&args.signal)?;
    let system = SystemKind::parse(&args.system)?;
    if args.t_steps < 2 {
        return Err(MindError::Parameter("--t-steps must be >= 2".into()));
    }
    let sys = IntervalSystem::new(system, args.n)?;
    let target = DistanceTarget::from_fn(|x| signal.eval(x), args.k, args.n, 64)?;
    // default budget range: up to the trivial spike decomposition cost
    let t_max = args.t_max.unwrap_or_else(|| 2.0 * (args.n as f64).sqrt() * target.seminorm().max(1.0));
    let t_grid: Vec<f64> =
        (0..args.t_steps).map(|i| t_max * i as f64 / (args.t_steps - 1) as f64).collect();
    let curve = distance_function(&target, args.k, &sys, &t_grid, args.gamma)?;
    let mut csv = String::from("t,d,d_plus_sqrt_gamma_t\n");
    for (t, d) in curve.t_grid.iter().zip(&curve.d_values) {
        csv.push_str(&format!("{},{},{}\n", t, d, d + (args.gamma * t).sqrt()));
    }
    io_write(&args.output, &csv)?;
    println!("c_n = {}", curve.c_n);
    Ok(0)
}

fn io_write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

/// Minimal dependency-free log-log line plot.
fn loglog_svg(title: &str, xs: &[f64], ys: &[f64]) -> String {
    let (w, h, ml, mb, mt, mr) = (640.0, 420.0, 70.0, 50.0, 30.0, 20.0);
    let lx: Vec<f64> = xs.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.log10()).collect();
    let (x0, x1) = bounds(&lx);
    let (y0, y1) = bounds(&ly);
    let sx = |v: f64| ml + (v - x0) / (x1 - x0).max(1e-12) * (w - ml - mr);
    let sy = |v: f64| h - mb - (v - y0) / (y1 - y0).max(1e-12) * (h - mb - mt);
    let mut path = String::new();
    for (i, (x, y)) in lx.iter().zip(&ly).enumerate() {
        path.push_str(if i == 0 { "M" } else { "L" });
        path.push_str(&format!("{:.2},{:.2} ", sx(*x), sy(*y)));
    }
    let mut markers = String::new();
    for (x, y) in lx.iter().zip(&ly) {
        markers.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#1f77b4\"/>",
            sx(*x),
            sy(*y)
        ));
    }
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>",
            "<text x=\"{tx}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{title}</text>",
            "<line x1=\"{ml}\" y1=\"{yb}\" x2=\"{xr}\" y2=\"{yb}\" stroke=\"black\"/>",
            "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{yb}\" stroke=\"black\"/>",
            "<text x=\"{tx}\" y=\"{h2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">log10 n</text>",
            "<text x=\"16\" y=\"{my}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {my})\" text-anchor=\"middle\">log10 loss</text>",
            "<path d=\"{path}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>",
            "{markers}",
            "</svg>"
        ),
        w = w,
        h = h,
        tx = (w + ml - mr) / 2.0,
        title = title,
        ml = ml,
        mt = mt,
        yb = h - mb,
        xr = w - mr,
        h2 = h - 12.0,
        my = (h - mb + mt) / 2.0,
        path = path,
        markers = markers,
    )
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}
