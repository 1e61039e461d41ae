//! Multiscale-constrained nonparametric regression in one dimension.
//!
//! The centerpiece is the MIND estimator: minimize the homogeneous Sobolev
//! seminorm `||D^k f||` subject to a multiresolution-norm bound on the
//! residual. The crate provides
//!
//! * periodic grid signals with FFT-diagonalized smoothing solves ([`grid`]),
//! * interval systems, the multiresolution norm and its LP dual ([`multiscale`]),
//! * threshold calibration, universal and Monte-Carlo quantile ([`threshold`]),
//! * the ADMM/Dykstra solver plus smoothing-spline and Nemirovski baselines
//!   ([`solvers`]),
//! * periodic B-splines, Green's functions and the multiscale distance
//!   function ([`spline`]),
//! * test signals, rate exponents and Monte-Carlo risk studies
//!   ([`experiments`]).

pub mod cli;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod multiscale;
pub mod rng;
pub mod solvers;
pub mod spline;
pub mod threshold;

pub use error::{MindError, Result};
pub use grid::{GridSignal, PeriodicGrid};
pub use multiscale::{IntervalSystem, SystemKind};
pub use solvers::{MindConfig, SolverReport};
pub use threshold::ThresholdRule;
