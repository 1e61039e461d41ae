//! Calibration of the multiscale constraint radius.
//!
//! Two rules are provided: the universal threshold `gamma_n = C (log n)^r`
//! (with the lower bound `C > sigma sqrt(5 + 2k/d)` enforced when `r = 1/2`),
//! and the Monte-Carlo `alpha`-quantile of the multiresolution statistic
//! `||xi||_B` under Gaussian noise. A fixed radius is also supported as CLI
//! plumbing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MindError, Result};
use crate::grid::GridSignal;
use crate::multiscale::{mr_norm_values, IntervalSystem};
use crate::rng::gaussian_vector;

/// How the constraint radius `gamma` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThresholdVariant {
    /// `gamma_n = C (log n)^r`; independent of the data and the system.
    Universal { c: f64, r: f64 },
    /// Empirical `(1-alpha)`-order statistic of `mc_runs` simulated noise
    /// statistics; deterministic given `seed`.
    Quantile { alpha: f64, mc_runs: usize, seed: u64 },
    /// Use `gamma` as given (CLI `--gamma`).
    Fixed { gamma: f64 },
}

/// Threshold rule together with the noise scale it calibrates against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub variant: ThresholdVariant,
    pub sigma: f64,
}

impl ThresholdRule {
    pub fn universal(c: f64, r: f64, sigma: f64) -> Self {
        Self { variant: ThresholdVariant::Universal { c, r }, sigma }
    }

    pub fn quantile(alpha: f64, mc_runs: usize, seed: u64, sigma: f64) -> Self {
        Self { variant: ThresholdVariant::Quantile { alpha, mc_runs, seed }, sigma }
    }

    pub fn fixed(gamma: f64) -> Self {
        Self { variant: ThresholdVariant::Fixed { gamma }, sigma: 0.0 }
    }

    /// Resolve the radius for an estimator of order `k` on the given system.
    pub fn resolve(&self, sys: &IntervalSystem, k: u32) -> Result<f64> {
        match self.variant {
            ThresholdVariant::Universal { .. } => universal_gamma(self, sys.n(), k),
            ThresholdVariant::Quantile { .. } => mc_quantile_gamma(self, sys),
            ThresholdVariant::Fixed { gamma } => {
                if gamma <= 0.0 {
                    return Err(MindError::Config(format!(
                        "fixed threshold must be positive, got {gamma}"
                    )));
                }
                Ok(gamma)
            }
        }
    }
}

/// The universal rule `C (log n)^r` for `d = 1`.
///
/// Requires `r >= 1/2`; at the boundary `r = 1/2` the constant must satisfy
/// `C > sigma sqrt(5 + 2k)`.
pub fn universal_gamma(rule: &ThresholdRule, n: usize, k: u32) -> Result<f64> {
    let ThresholdVariant::Universal { c, r } = rule.variant else {
        return Err(MindError::Config("universal_gamma needs a Universal rule".into()));
    };
    if n < 2 {
        return Err(MindError::Parameter("universal threshold needs n >= 2".into()));
    }
    if r < 0.5 {
        return Err(MindError::Config(format!("exponent r must be >= 1/2, got {r}")));
    }
    if c <= 0.0 {
        return Err(MindError::Config(format!("constant C must be positive, got {c}")));
    }
    if r == 0.5 {
        let min_c = rule.sigma * (5.0 + 2.0 * k as f64).sqrt();
        if c <= min_c {
            return Err(MindError::Config(format!(
                "with r = 1/2 and k = {k} the constant must exceed sigma*sqrt(5+2k) = {min_c:.6}, got {c}"
            )));
        }
    }
    Ok(c * (n as f64).ln().powf(r))
}

/// Empirical `(1-alpha)`-quantile of `||xi||_B`, `xi ~ N(0, sigma^2 I)`.
///
/// Uses the lower empirical quantile (the `ceil((1-alpha) mc_runs)`-th order
/// statistic); deterministic given the seed and independent of the degree of
/// parallelism. Runs 10^4..10^5 are typical.
pub fn mc_quantile_gamma(rule: &ThresholdRule, sys: &IntervalSystem) -> Result<f64> {
    let ThresholdVariant::Quantile { alpha, mc_runs, seed } = rule.variant else {
        return Err(MindError::Config("mc_quantile_gamma needs a Quantile rule".into()));
    };
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(MindError::Parameter(format!("alpha must be in (0,1), got {alpha}")));
    }
    if mc_runs == 0 {
        return Err(MindError::Parameter("mc_runs must be positive".into()));
    }
    if rule.sigma <= 0.0 {
        return Err(MindError::Parameter("sigma must be positive".into()));
    }
    let stats = simulate_noise_statistics(sys, rule.sigma, mc_runs, seed);
    Ok(lower_quantile(stats, alpha))
}

/// The simulated multiresolution statistics themselves (sorted ascending).
pub fn simulate_noise_statistics(
    sys: &IntervalSystem,
    sigma: f64,
    mc_runs: usize,
    seed: u64,
) -> Vec<f64> {
    let n = sys.n();
    let mut stats: Vec<f64> = (0..mc_runs)
        .into_par_iter()
        .map(|rep| {
            let noise = gaussian_vector(seed, rep as u64, n, sigma);
            mr_norm_values(&noise, sys)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    stats
}

/// `ceil((1-alpha) len)`-th order statistic (1-based), ties by index.
fn lower_quantile(sorted: Vec<f64>, alpha: f64) -> f64 {
    let rank = ((1.0 - alpha) * sorted.len() as f64).ceil() as usize;
    let rank = rank.clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Union-bound tail of the multiresolution statistic:
/// `min(1, 2 n^2 exp(-t^2 / (2 sigma^2)))`.
pub fn tail_bound(n: usize, sigma: f64, t: f64) -> f64 {
    let n = n as f64;
    (2.0 * n * n * (-t * t / (2.0 * sigma * sigma)).exp()).min(1.0)
}

/// Rice-type noise-scale estimate from first differences:
/// `median |y_{i+1} - y_i| / (sqrt(2) * 0.6745)`.
pub fn estimate_sigma(y: &GridSignal) -> f64 {
    let v = y.values();
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let mut diffs: Vec<f64> = (0..n - 1).map(|i| (v[i + 1] - v[i]).abs()).collect();
    diffs.sort_by(f64::total_cmp);
    let mid = diffs.len() / 2;
    let median = if diffs.len() % 2 == 1 {
        diffs[mid]
    } else {
        0.5 * (diffs[mid - 1] + diffs[mid])
    };
    median / (2.0f64.sqrt() * 0.6745)
}

/// Cached calibration result, serialized as JSON.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GammaCacheEntry {
    pub n: usize,
    pub system: String,
    pub sigma: f64,
    pub alpha: f64,
    pub mc_runs: usize,
    pub seed: u64,
    pub gamma: f64,
}
