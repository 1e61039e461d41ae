//! Test signals, convergence-rate exponents, and Monte-Carlo risk studies.
//!
//! The rate algebra is implemented twice on purpose: in floating point for
//! reporting, and in exact rational arithmetic for the adaptation-region
//! table checks, where the estimator exponent and the minimax exponent must
//! agree identically, not just within a tolerance.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MindError, Result};
use crate::grid::GridSignal;
use crate::multiscale::{IntervalSystem, SystemKind};
use crate::rng::gaussian_vector;
use crate::solvers::{solve_mind_with_gamma, solve_smoothing_spline, MindConfig};
use crate::threshold::ThresholdRule;

/// The standard spatially-variable test signals plus sinusoids.
///
/// The closed forms follow the classical wavelet-shrinkage benchmark suite;
/// jump locations and heights are pinned here verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestSignal {
    Bumps,
    HeaviSine,
    Doppler,
    Blocks,
    Sine(u32),
}

const DJ_T: [f64; 11] = [0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81];
const BLOCKS_H: [f64; 11] = [4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2];
const BUMPS_H: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
const BUMPS_W: [f64; 11] =
    [0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005];

impl TestSignal {
    pub fn label(&self) -> String {
        match self {
            TestSignal::Bumps => "bumps".into(),
            TestSignal::HeaviSine => "heavisine".into(),
            TestSignal::Doppler => "doppler".into(),
            TestSignal::Blocks => "blocks".into(),
            TestSignal::Sine(f) => format!("sine:{f}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bumps" => Ok(TestSignal::Bumps),
            "heavisine" => Ok(TestSignal::HeaviSine),
            "doppler" => Ok(TestSignal::Doppler),
            "blocks" => Ok(TestSignal::Blocks),
            _ => {
                if let Some(f) = s.strip_prefix("sine:") {
                    let f: u32 = f
                        .parse()
                        .map_err(|_| MindError::Parameter(format!("bad sine frequency in {s:?}")))?;
                    Ok(TestSignal::Sine(f))
                } else {
                    Err(MindError::Parameter(format!(
                        "unknown signal {s:?} (expected bumps, heavisine, doppler, blocks, or sine:f)"
                    )))
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestSignal::Sine(f) => (2.0 * std::f64::consts::PI * *f as f64 * x).sin(),
            TestSignal::Blocks => {
                let mut acc = 0.0;
                for (t, h) in DJ_T.iter().zip(&BLOCKS_H) {
                    acc += h * (1.0 + (x - t).signum()) / 2.0;
                }
                acc
            }
            TestSignal::Bumps => {
                let mut acc = 0.0;
                for ((t, h), w) in DJ_T.iter().zip(&BUMPS_H).zip(&BUMPS_W) {
                    acc += h * (1.0 + ((x - t) / w).abs()).powi(-4);
                }
                acc
            }
            TestSignal::HeaviSine => {
                4.0 * (4.0 * std::f64::consts::PI * x).sin()
                    - (x - 0.3).signum()
                    - (0.72 - x).signum()
            }
            TestSignal::Doppler => {
                (x * (1.0 - x)).max(0.0).sqrt()
                    * (2.0 * std::f64::consts::PI * 1.05 / (x + 0.05)).sin()
            }
        }
    }
}

/// Sample a test signal on the grid; deterministic in `(name, n)`.
pub fn generate_signal(signal: TestSignal, n: usize) -> Result<GridSignal> {
    if n < 8 {
        return Err(MindError::Parameter(format!("signals need n >= 8, got {n}")));
    }
    GridSignal::from_fn(n, |x| signal.eval(x))
}

/// Sample and rescale so the discrete `L^2` norm equals `target_l2`.
pub fn generate_signal_normalized(
    signal: TestSignal,
    n: usize,
    target_l2: f64,
) -> Result<GridSignal> {
    if target_l2 <= 0.0 {
        return Err(MindError::Parameter("target norm must be positive".into()));
    }
    let raw = generate_signal(signal, n)?;
    let norm = raw.lq_norm(2.0)?;
    if norm == 0.0 {
        return Err(MindError::Parameter("cannot normalize the zero signal".into()));
    }
    let scale = target_l2 / norm;
    GridSignal::from_values(raw.values().iter().map(|v| v * scale).collect())
}

type Rat = Ratio<i64>;

fn rat(n: i64, d: i64) -> Rat {
    Ratio::new(n, d)
}

/// Interpolation exponent for `d = 1`:
/// `theta = k/(2k+1)` for `q <= 4k+2`, else `(k - 1/2 + 1/q) / (2k)`.
/// `inv_q = 1/q` with `0` meaning `q = inf`.
pub fn vartheta_exact(k: i64, inv_q: Rat) -> Rat {
    let threshold = rat(1, 4 * k + 2); // 1/q <= this means q >= 4k+2
    if inv_q >= threshold {
        rat(k, 2 * k + 1)
    } else {
        (rat(k, 1) - rat(1, 2) + inv_q) / rat(2 * k, 1)
    }
}

/// Distance-function decay exponent for extra smoothness `s in [1, k]`:
/// `mu = (s - (1/p - 1/2)_+) / (2s + 2k + 1 - 2 (1/p - 1/2)_+)`.
pub fn mu_exact(k: i64, s: Rat, inv_p: Rat) -> Rat {
    let gap = if inv_p > rat(1, 2) { inv_p - rat(1, 2) } else { rat(0, 1) };
    (s - gap) / (s * rat(2, 1) + rat(2 * k + 1, 1) - gap * rat(2, 1))
}

/// Estimator polynomial exponent over the adaptation region, in exact
/// arithmetic. `s_total` is the full smoothness order; for `s_total <= k`
/// the over-smoothing rate `s/(2s+1)` applies (sup-norm scale,
/// `inv_p = 0`), above `k` the higher-order rate `mu (1-2 theta) + theta`.
pub fn mind_rate_exponent_exact(k: i64, s_total: Rat, inv_p: Rat, inv_q: Rat) -> Result<Rat> {
    if s_total < rat(1, 1) || s_total > rat(2 * k, 1) {
        return Err(MindError::Parameter("s_total must lie in [1, 2k]".into()));
    }
    if s_total <= rat(k, 1) {
        if inv_p != rat(0, 1) {
            return Err(MindError::Parameter(
                "the over-smoothing branch requires p = infinity".into(),
            ));
        }
        Ok(s_total / (s_total * rat(2, 1) + rat(1, 1)))
    } else {
        let theta = vartheta_exact(k, inv_q);
        let s_extra = s_total - rat(k, 1);
        let mu = mu_exact(k, s_extra, inv_p);
        Ok(mu * (rat(1, 1) - theta * rat(2, 1)) + theta)
    }
}

/// Minimax polynomial exponent over a smoothness ball:
/// `beta = s/(2s+1)` when `q < (2s+1) p`, else `(s - 1/p + 1/q)/(2s+1-2/p)`;
/// the second branch carries a log factor.
pub fn minimax_exponent_exact(s: Rat, inv_p: Rat, inv_q: Rat) -> (Rat, bool) {
    // q >= (2s+1) p <=> inv_p >= (2s+1) inv_q
    let log_branch = inv_p >= (s * rat(2, 1) + rat(1, 1)) * inv_q;
    if !log_branch {
        (s / (s * rat(2, 1) + rat(1, 1)), false)
    } else {
        let beta = (s - inv_p + inv_q) / (s * rat(2, 1) + rat(1, 1) - inv_p * rat(2, 1));
        (beta, true)
    }
}

/// Rate exponents in floating point. `s` is the extra smoothness in `[1,k]`
/// of the higher-order branch; `p`, `q` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateParams {
    pub k: u32,
    pub q: f64,
    pub s: f64,
    pub p: f64,
    pub vartheta: f64,
    pub vartheta_prime: f64,
    pub mu: f64,
    /// `mu (1 - 2 vartheta) + vartheta`; the loss decays like `n^-overall`.
    pub overall: f64,
}

pub fn rate_exponent(k: u32, q: f64, s: f64, p: f64) -> Result<RateParams> {
    if k == 0 {
        return Err(MindError::Parameter("k must be >= 1".into()));
    }
    if !(1.0..=k as f64).contains(&s) {
        return Err(MindError::Parameter(format!("extra smoothness s must be in [1, k], got {s}")));
    }
    if !(q >= 1.0) || !(p >= 1.0) {
        return Err(MindError::Parameter("p and q must be >= 1".into()));
    }
    let kf = k as f64;
    let vartheta = if q <= 4.0 * kf + 2.0 {
        kf / (2.0 * kf + 1.0)
    } else {
        (kf - 0.5 + if q.is_infinite() { 0.0 } else { 1.0 / q }) / (2.0 * kf)
    };
    let vartheta_prime = 2.0 * kf * vartheta;
    let gap = if p.is_infinite() { 0.0 } else { (1.0 / p - 0.5).max(0.0) };
    let mu = (s - gap) / (2.0 * s + 2.0 * kf + 1.0 - 2.0 * gap);
    let overall = mu * (1.0 - 2.0 * vartheta) + vartheta;
    Ok(RateParams { k, q, s, p, vartheta, vartheta_prime, mu, overall })
}

/// Minimax rate over a smoothness ball, floating point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MinimaxRate {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub beta: f64,
    pub log_factor: bool,
}

pub fn minimax_exponent(s: f64, p: f64, q: f64) -> Result<MinimaxRate> {
    if !(p >= 1.0) || !(q >= 1.0) {
        return Err(MindError::Parameter("p and q must be >= 1".into()));
    }
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    if s <= inv_p {
        return Err(MindError::Parameter(format!("need s > 1/p, got s = {s}, p = {p}")));
    }
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    let log_factor = inv_p >= (2.0 * s + 1.0) * inv_q;
    let beta = if !log_factor {
        s / (2.0 * s + 1.0)
    } else {
        (s - inv_p + inv_q) / (2.0 * s + 1.0 - 2.0 * inv_p)
    };
    Ok(MinimaxRate { s, p, q, beta, log_factor })
}

/// How the noise level is specified.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum NoiseScale {
    Absolute(f64),
    /// `sigma = factor * ||f||_{L^2}` (discrete norm of the sampled truth).
    RelativeL2(f64),
}

impl NoiseScale {
    pub fn resolve(&self, truth: &GridSignal) -> Result<f64> {
        match self {
            NoiseScale::Absolute(s) => Ok(*s),
            NoiseScale::RelativeL2(f) => Ok(f * truth.lq_norm(2.0)?),
        }
    }
}

/// Threshold choice for a study, with `sigma` filled in per grid size.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum GammaRule {
    QuantileAlpha { alpha: f64, mc_runs: usize },
    Universal { c: f64, r: f64 },
    Fixed { gamma: f64 },
}

impl GammaRule {
    fn resolve(&self, sys: &IntervalSystem, k: u32, sigma: f64, seed: u64) -> Result<f64> {
        let rule = match self {
            GammaRule::QuantileAlpha { alpha, mc_runs } => {
                ThresholdRule::quantile(*alpha, *mc_runs, seed, sigma)
            }
            GammaRule::Universal { c, r } => ThresholdRule::universal(*c, *r, sigma),
            GammaRule::Fixed { gamma } => ThresholdRule::fixed(*gamma),
        };
        rule.resolve(sys, k)
    }
}

/// Configuration of a Monte-Carlo risk study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskStudyConfig {
    pub signal: TestSignal,
    /// Rescale the truth to this discrete `L^2` norm (None keeps the raw scale).
    pub normalize_l2: Option<f64>,
    pub k: u32,
    pub system: SystemKind,
    pub gamma_rule: GammaRule,
    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub noise: NoiseScale,
    pub seed: u64,
    pub q_list: Vec<f64>,
}

/// Mean loss with Monte-Carlo standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LossSummary {
    pub q: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskRow {
    pub n: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub losses: Vec<LossSummary>,
    pub mean_iterations: f64,
    pub solver_warnings: usize,
}

/// Least-squares slope of `log risk` against `log n`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SlopeFit {
    pub q: f64,
    pub slope: f64,
    /// Half-width of an approximate 95% confidence interval.
    pub ci_half_width: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub config: RiskStudyConfig,
    pub rows: Vec<RiskRow>,
    pub slopes: Vec<SlopeFit>,
}

pub fn fit_loglog_slope(ns: &[f64], risks: &[f64], q: f64) -> Result<SlopeFit> {
    if ns.len() != risks.len() || ns.len() < 2 {
        return Err(MindError::Parameter("need at least two points for a slope".into()));
    }
    if risks.iter().any(|r| *r <= 0.0) {
        return Err(MindError::Parameter("risks must be positive for a log-log fit".into()));
    }
    let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = risks.iter().map(|r| r.ln()).collect();
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let dof = (m - 2.0).max(1.0);
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let se = (ss_res / dof / sxx).sqrt();
    Ok(SlopeFit { q, slope, ci_half_width: 2.0 * se, intercept })
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Run the study: for each `n`, draw noisy replicates on per-replicate
/// streams, solve MIND, and aggregate `L^q` losses in replicate order.
/// Deterministic in the seed and independent of thread scheduling.
pub fn run_risk_study(cfg: &RiskStudyConfig) -> Result<ExperimentReport> {
    if cfg.replicates == 0 {
        return Err(MindError::Parameter("replicates must be >= 1".into()));
    }
    if cfg.q_list.is_empty() {
        return Err(MindError::Parameter("q_list must be non-empty".into()));
    }
    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for (n_index, &n) in cfg.n_list.iter().enumerate() {
        let truth = match cfg.normalize_l2 {
            Some(t) => generate_signal_normalized(cfg.signal, n, t)?,
            None => generate_signal(cfg.signal, n)?,
        };
        let sigma = cfg.noise.resolve(&truth)?;
        let sys = IntervalSystem::new(cfg.system, n)?;
        // calibration stream is separated from the data streams
        let gamma = cfg.gamma_rule.resolve(&sys, cfg.k, sigma, cfg.seed ^ 0x9e3779b97f4a7c15)?;
        let mind_cfg = MindConfig::new(cfg.k, cfg.system, ThresholdRule::fixed(gamma));

        let rep_results: Vec<Result<(Vec<f64>, usize, bool)>> = (0..cfg.replicates)
            .into_par_iter()
            .map(|rep| {
                let stream = (n_index * cfg.replicates + rep) as u64;
                let noise = gaussian_vector(cfg.seed, stream, n, sigma);
                let y = GridSignal::from_values(
                    truth.values().iter().zip(&noise).map(|(f, e)| f + e).collect(),
                )?;
                let report = solve_mind_with_gamma(&y, &mind_cfg, &sys, gamma)?;
                let mut losses = Vec::with_capacity(cfg.q_list.len());
                for &q in &cfg.q_list {
                    let diff = GridSignal::from_values(
                        report
                            .estimate
                            .values()
                            .iter()
                            .zip(truth.values())
                            .map(|(a, b)| a - b)
                            .collect(),
                    )?;
                    losses.push(diff.lq_norm(q)?);
                }
                Ok((losses, report.iterations, report.warning))
            })
            .collect();

        let mut per_q: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.replicates); cfg.q_list.len()];
        let mut iters = 0usize;
        let mut warnings = 0usize;
        for r in rep_results {
            let (losses, it, warn) = r?;
            for (bucket, l) in per_q.iter_mut().zip(&losses) {
                bucket.push(*l);
            }
            iters += it;
            warnings += warn as usize;
        }
        let losses = cfg
            .q_list
            .iter()
            .zip(&per_q)
            .map(|(&q, vals)| {
                let (mean, stderr) = mean_and_stderr(vals);
                LossSummary { q, mean, stderr }
            })
            .collect();
        rows.push(RiskRow {
            n,
            sigma,
            gamma,
            losses,
            mean_iterations: iters as f64 / cfg.replicates as f64,
            solver_warnings: warnings,
        });
    }

    let mut slopes = Vec::new();
    if rows.len() >= 2 {
        let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        for (qi, &q) in cfg.q_list.iter().enumerate() {
            let risks: Vec<f64> = rows.iter().map(|r| r.losses[qi].mean).collect();
            if risks.iter().all(|r| *r > 0.0) {
                slopes.push(fit_loglog_slope(&ns, &risks, q)?);
            }
        }
    }
    Ok(ExperimentReport { schema: 1, config: cfg.clone(), rows, slopes })
}

/// One signal's row of the three-estimator comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub signal: String,
    pub mind: LossSummary,
    pub smoothing_spline: LossSummary,
    pub nemirovski: LossSummary,
    pub gamma: f64,
    pub eta_oracle: f64,
    pub best_lambda: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema: u32,
    pub n: usize,
    pub k: u32,
    pub alpha: f64,
    pub sigma_relative: f64,
    pub replicates: usize,
    pub seed: u64,
    pub system: SystemKind,
    pub rows: Vec<ComparisonRow>,
}

/// Log-spaced smoothing-spline grid spanning interpolation to constant fits.
pub fn ss_lambda_grid(n: usize) -> Vec<f64> {
    let lo: f64 = 1e-6;
    let hi: f64 = 1e2;
    let count = 25;
    (0..count)
        .map(|i| {
            let u = i as f64 / (count - 1) as f64;
            lo * (hi / lo).powf(u) / n as f64
        })
        .collect()
}

/// Compare MIND against the best-of-grid smoothing spline and the
/// oracle-budget Nemirovski baseline on the named signals.
#[allow(clippy::too_many_arguments)]
pub fn run_comparison(
    signals: &[TestSignal],
    n: usize,
    k: u32,
    alpha: f64,
    sigma_relative: f64,
    replicates: usize,
    mc_runs: usize,
    seed: u64,
    system: SystemKind,
) -> Result<ComparisonReport> {
    if replicates == 0 {
        return Err(MindError::Parameter("replicates must be >= 1".into()));
    }
    let sys = IntervalSystem::new(system, n)?;
    // all signals are normalized to unit L2, so one calibration serves all
    let sigma = sigma_relative;
    let rule = ThresholdRule::quantile(alpha, mc_runs, seed ^ 0xabcdef12345, sigma);
    let gamma = rule.resolve(&sys, k)?;
    let lambda_grid = ss_lambda_grid(n);

    let mut rows = Vec::with_capacity(signals.len());
    for (sig_index, &signal) in signals.iter().enumerate() {
        let truth = generate_signal_normalized(signal, n, 1.0)?;
        let eta_oracle = truth.centered().0.sobolev_seminorm(k)?;
        let mind_cfg = MindConfig::new(k, system, ThresholdRule::fixed(gamma));

        let results: Vec<Result<(f64, f64, f64, f64)>> = (0..replicates)
            .into_par_iter()
            .map(|rep| {
                let stream = (sig_index * replicates + rep) as u64;
                let noise = gaussian_vector(seed, stream, n, sigma);
                let y = GridSignal::from_values(
                    truth.values().iter().zip(&noise).map(|(f, e)| f + e).collect(),
                )?;
                let l2 = |est: &GridSignal| -> Result<f64> {
                    GridSignal::from_values(
                        est.values().iter().zip(truth.values()).map(|(a, b)| a - b).collect(),
                    )?
                    .lq_norm(2.0)
                };

                let mind = solve_mind_with_gamma(&y, &mind_cfg, &sys, gamma)?;
                let mind_loss = l2(&mind.estimate)?;

                let mut ss_best = f64::INFINITY;
                let mut ss_best_lambda = lambda_grid[0];
                for &lambda in &lambda_grid {
                    let fit = solve_smoothing_spline(&y, k, lambda)?;
                    let loss = l2(&fit)?;
                    if loss < ss_best {
                        ss_best = loss;
                        ss_best_lambda = lambda;
                    }
                }

                let nem = crate::solvers::solve_nemirovski(&y, k, eta_oracle, &sys, &mind_cfg)?;
                let nem_loss = l2(&nem.estimate)?;
                Ok((mind_loss, ss_best, nem_loss, ss_best_lambda))
            })
            .collect();

        let mut mind_losses = Vec::with_capacity(replicates);
        let mut ss_losses = Vec::with_capacity(replicates);
        let mut nem_losses = Vec::with_capacity(replicates);
        let mut best_lambda = 0.0;
        for r in results {
            let (m, s, e, bl) = r?;
            mind_losses.push(m);
            ss_losses.push(s);
            nem_losses.push(e);
            best_lambda += bl / replicates as f64;
        }
        let (mm, ms) = mean_and_stderr(&mind_losses);
        let (sm, ss) = mean_and_stderr(&ss_losses);
        let (nm, ns_) = mean_and_stderr(&nem_losses);
        rows.push(ComparisonRow {
            signal: signal.label(),
            mind: LossSummary { q: 2.0, mean: mm, stderr: ms },
            smoothing_spline: LossSummary { q: 2.0, mean: sm, stderr: ss },
            nemirovski: LossSummary { q: 2.0, mean: nm, stderr: ns_ },
            gamma,
            eta_oracle,
            best_lambda,
        });
    }
    Ok(ComparisonReport {
        schema: 1,
        n,
        k,
        alpha,
        sigma_relative,
        replicates,
        seed,
        system,
        rows,
    })
}
