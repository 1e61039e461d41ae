//! Periodic grid signals, discrete differential operators and FFT solves.
//!
//! All estimators in this crate work on the equidistant periodic grid
//! `x_i = i/n`, `i = 0..n-1`. The k-th derivative is discretized as the
//! k-fold periodic forward difference scaled by `n^k`; with the quadrature
//! weight `1/n` this makes the discrete seminorm consistent with
//! `||D^k f||_{L^2}` on the torus as `n` grows, and the resulting operator
//! is circulant, so every quadratic subproblem diagonalizes in the Fourier
//! basis.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{MindError, Result};

/// The equidistant periodic grid on `[0,1)` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicGrid {
    n: usize,
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(MindError::Parameter("grid size must be positive".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The i-th grid point `i/n`.
    pub fn point(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.point(i))
    }
}

/// Real values sampled on a [`PeriodicGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal {
    grid: PeriodicGrid,
    values: Vec<f64>,
    zero_mean: bool,
}

impl GridSignal {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(MindError::GridMismatch(format!(
                "signal has {} values but the grid has {} points",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values, zero_mean: false })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let grid = PeriodicGrid::new(values.len())?;
        Self::new(grid, values)
    }

    /// Sample `f` at the grid points of `Gamma_n`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = PeriodicGrid::new(n)?;
        let values = grid.points().map(f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.n() as f64
    }

    /// Whether the signal was produced by [`GridSignal::centered`].
    pub fn is_zero_mean(&self) -> bool {
        self.zero_mean
    }

    /// Split into the zero-mean part and the sample mean.
    pub fn centered(&self) -> (GridSignal, f64) {
        let m = self.mean();
        let values = self.values.iter().map(|v| v - m).collect();
        let mut s = Self { grid: self.grid, values, zero_mean: true };
        // Kill the numerically tiny leftover so the flag is honest.
        let resid = s.values.iter().sum::<f64>() / s.n() as f64;
        if resid != 0.0 {
            for v in &mut s.values {
                *v -= resid;
            }
        }
        (s, m)
    }

    /// Add a constant to every value.
    pub fn shifted(&self, c: f64) -> GridSignal {
        let values = self.values.iter().map(|v| v + c).collect();
        Self { grid: self.grid, values, zero_mean: false }
    }

    /// Discrete `L^q` norm with quadrature weight `1/n`:
    /// `(1/n sum |v_i|^q)^(1/q)`, or `max |v_i|` for `q = inf`.
    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        if !(q >= 1.0) {
            return Err(MindError::Parameter(format!("lq_norm requires q >= 1, got {q}")));
        }
        if q.is_infinite() {
            return Ok(self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
        let n = self.n() as f64;
        if q == 2.0 {
            let s: f64 = self.values.iter().map(|v| v * v).sum();
            return Ok((s / n).sqrt());
        }
        if q == 1.0 {
            let s: f64 = self.values.iter().map(|v| v.abs()).sum();
            return Ok(s / n);
        }
        let s: f64 = self.values.iter().map(|v| v.abs().powf(q)).sum();
        Ok((s / n).powf(1.0 / q))
    }

    /// Homogeneous Sobolev seminorm `||D^k f||` of the signal, computed
    /// spectrally. Constants are in the null space, so the sample mean is
    /// ignored by construction.
    pub fn sobolev_seminorm(&self, k: u32) -> Result<f64> {
        let op = SpectralOperator::new(self.grid, k)?;
        Ok(op.seminorm(self))
    }
}

// Signals serialize as bare JSON arrays of values.
impl serde::Serialize for GridSignal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.values().serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for GridSignal {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(deserializer)?;
        GridSignal::from_values(values).map_err(serde::de::Error::custom)
    }
}

/// Eigenvalues of the circulant discrete `D^k` on an `n`-point grid.
///
/// `symbol[w] = (n (e^{2 pi i w / n} - 1))^k`; in particular `symbol[0] = 0`.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    k: u32,
    symbol: Vec<Complex<f64>>,
}

impl SpectralOperator {
    pub fn new(grid: PeriodicGrid, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(MindError::Parameter("derivative order k must be >= 1".into()));
        }
        let n = grid.n();
        let nf = n as f64;
        let symbol = (0..n)
            .map(|w| {
                let phase = 2.0 * std::f64::consts::PI * w as f64 / nf;
                let unit = Complex::new(phase.cos() - 1.0, phase.sin());
                (unit * nf).powu(k)
            })
            .collect();
        Ok(Self { k, symbol })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn symbol(&self) -> &[Complex<f64>] {
        &self.symbol
    }

    /// Squared modulus of the symbol at frequency `w`.
    pub fn symbol_sq(&self, w: usize) -> f64 {
        self.symbol[w].norm_sqr()
    }

    /// `||D^k s||` with quadrature weight `1/n`.
    pub fn seminorm(&self, s: &GridSignal) -> f64 {
        self.seminorm_sq(s).sqrt()
    }

    pub fn seminorm_sq(&self, s: &GridSignal) -> f64 {
        let n = s.n();
        debug_assert_eq!(n, self.symbol.len());
        let spec = fft_forward(s.values());
        let mut acc = 0.0;
        for w in 1..n {
            acc += self.symbol[w].norm_sqr() * spec[w].norm_sqr();
        }
        acc / (n as f64 * n as f64)
    }
}

/// Exact minimizer of `1/2 ||D^k f||^2 + rho/2 ||f - rhs||^2` (both norms
/// with quadrature weight `1/n`), computed in the Fourier domain:
/// `f_hat(w) = rho rhs_hat(w) / (|symbol(w)|^2 + rho)` for `w != 0` and
/// `f_hat(0) = rhs_hat(0)`, so the mean of `rhs` is preserved.
pub fn solve_smoothing(rhs: &GridSignal, k: u32, rho: f64) -> Result<GridSignal> {
    if rho <= 0.0 {
        return Err(MindError::Parameter(format!("rho must be positive, got {rho}")));
    }
    let op = SpectralOperator::new(rhs.grid(), k)?;
    let n = rhs.n();
    let mut spec = fft_forward(rhs.values());
    for w in 1..n {
        let shrink = rho / (op.symbol_sq(w) + rho);
        spec[w] *= shrink;
    }
    let values = fft_inverse_real(&mut spec);
    GridSignal::new(rhs.grid(), values)
}

/// Closed-form smoothing-spline solve:
/// `argmin ||f - y||^2 + lambda ||D^k f||^2` (quadrature norms), i.e.
/// `f_hat(w) = y_hat(w) / (1 + lambda |symbol(w)|^2)` with the mean kept.
pub fn solve_penalized(y: &GridSignal, k: u32, lambda: f64) -> Result<GridSignal> {
    if lambda <= 0.0 {
        return Err(MindError::Parameter(format!("lambda must be positive, got {lambda}")));
    }
    let op = SpectralOperator::new(y.grid(), k)?;
    let n = y.n();
    let mut spec = fft_forward(y.values());
    for w in 1..n {
        spec[w] /= 1.0 + lambda * op.symbol_sq(w);
    }
    let values = fft_inverse_real(&mut spec);
    GridSignal::new(y.grid(), values)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan_forward(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn plan_inverse(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Unnormalized forward DFT of a real vector.
pub(crate) fn fft_forward(values: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    plan_forward(values.len()).process(&mut buf);
    buf
}

/// Inverse DFT scaled by `1/n`; returns the real parts.
pub(crate) fn fft_inverse_real(spec: &mut [Complex<f64>]) -> Vec<f64> {
    let n = spec.len();
    plan_inverse(n).process(spec);
    let scale = 1.0 / n as f64;
    spec.iter().map(|c| c.re * scale).collect()
}
