//! Randomized initial data for free dispersive flows, simulated on periodic
//! spectral grids.
//!
//! The crate builds unit-scale frequency projections from a smooth partition
//! of unity, randomizes data by attaching an independent complex Gaussian to
//! every unit frequency cell, and evolves the result under the free KdV, wave
//! and (non-)elliptic Schrödinger propagators. On top of that sit Monte Carlo
//! estimators for the tail probabilities `P(|S(t)f^ω(x) - f^ω(x)| > α)`,
//! Gaussian-tail constant fitting, and the density split `f = g + h`.
//!
//! Module map:
//!
//! - [`grid`]: periodic grids, the unitary discrete Fourier pair, norms, file formats
//! - [`wiener`]: the bump `ψ`, the unit lattice, projections and square functions
//! - [`propagators`]: free flows as diagonal Fourier multipliers
//! - [`randomize`]: counter-based Gaussian draws and the randomization map
//! - [`decompose`]: smooth-plus-small splits and decay seminorms
//! - [`tailprob`]: tail experiments, bounds, fits and convergence curves
//! - [`stats`]: Wilson intervals, KS distance, least squares
//! - [`experiments`]: batch configuration and orchestration behind the `probconv` binary

// Range checks are written as `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decompose;
mod error;
pub mod experiments;
pub mod grid;
pub mod propagators;
pub mod randomize;
pub mod stats;
pub mod tailprob;
pub mod wiener;

pub use error::{Error, Result};
pub use grid::{Field, GridSpec, MultiIndex, Spectrum};
pub use propagators::{FlowKind, MultiplierKind, Signature};
pub use randomize::RandomDraw;
pub use wiener::UnitLattice;

pub use rustfft::num_complex::Complex64;
