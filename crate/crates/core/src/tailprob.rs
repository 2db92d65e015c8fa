//! Monte Carlo tail experiments for `|S(t)f^ω(x) - f^ω(x)|`, Gaussian-tail
//! bounds `C₁·exp(-(α/(C·e·scale))²)`, constant fitting, convergence curves
//! along the `ε`-schedule, and the density event of the probabilistic density
//! theorem.
//!
//! For a fixed `(t, x)` the deviation is linear in the coefficients:
//! `S(t)f^ω(x) - f^ω(x) = Σ_k g_k a_k(t, x)` with
//! `a_k = (2π)^{-n/2} dξ^n Σ_{ξ ∈ cell k} e^{ix·ξ} ψ(ξ - k) (m_t(ξ) - 1) 𝓕f(ξ)`.
//! [`estimate_tail`] evaluates these point coefficients once and then only
//! forms inner products per draw. [`pointwise_deviation`] runs the full
//! randomize-evolve-transform pipeline and serves as its cross-check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::{self, SplitParams};
use crate::grid::{self, Field, MultiIndex, Spectrum, MAX_DIM};
use crate::propagators::{self, FlowKind};
use crate::randomize::{self, gaussian_coefficient, RandomDraw};
use crate::stats::{self, wilson_interval, Z_95};
use crate::wiener::UnitLattice;
use crate::{Complex64, Error, Result};

/// Smallest ensemble accepted by the tail experiments.
pub const MIN_ENSEMBLE: usize = 100;

/// Inputs of a tail experiment.
#[derive(Debug, Clone)]
pub struct TailExperimentConfig {
    pub flow: FlowKind,
    pub data: Field,
    pub times: Vec<f64>,
    pub thresholds: Vec<f64>,
    /// Flat grid indices of the observation points.
    pub observation_points: Vec<usize>,
    pub ensemble_size: usize,
    pub seed: u64,
}

impl TailExperimentConfig {
    /// Checks the configuration and returns non-fatal diagnostics.
    pub fn validate(&self) -> Result<Vec<String>> {
        let spec = self.data.spec();
        self.flow.check_dim(spec.dim())?;
        if self.ensemble_size < MIN_ENSEMBLE {
            return Err(Error::Config(format!(
                "ensemble_size must be at least {MIN_ENSEMBLE} (got {})",
                self.ensemble_size
            )));
        }
        if self.times.is_empty() || self.thresholds.is_empty() || self.observation_points.is_empty()
        {
            return Err(Error::Config(
                "times, thresholds and observation_points must be non-empty".into(),
            ));
        }
        if let Some(t) = self.times.iter().find(|t| !t.is_finite()) {
            return Err(Error::Config(format!("time {t} is not finite")));
        }
        if let Some(a) = self.thresholds.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
            return Err(Error::Config(format!("threshold {a} must be finite and nonnegative")));
        }
        if let Some(x) = self.observation_points.iter().find(|x| **x >= spec.len()) {
            return Err(Error::Config(format!(
                "observation point {x} out of range 0..{}",
                spec.len()
            )));
        }
        let limit = resolution_time_limit(&self.flow, &self.data);
        let mut notes = Vec::new();
        for &t in &self.times {
            if t.abs() > limit {
                notes.push(format!(
                    "|t| = {t} exceeds the dispersive resolution limit {limit:.3e} of this grid"
                ));
            }
        }
        let half_width = 0.5 * Z_95 / (self.ensemble_size as f64).sqrt();
        if half_width > 0.05 {
            notes.push(format!(
                "ensemble of {} gives Wilson half-widths up to {half_width:.3}",
                self.ensemble_size
            ));
        }
        Ok(notes)
    }
}

/// Relative spectral level below which a frequency counts as empty.
pub const SPECTRAL_FLOOR: f64 = 1e-10;

/// Time after which the fastest wave packet present in `f` (frequencies with
/// `|𝓕f| > SPECTRAL_FLOOR·max|𝓕f|`) travels half the box and wraps around.
pub fn resolution_time_limit(flow: &FlowKind, f: &Field) -> f64 {
    let s = grid::forward_transform(f);
    let top = s.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let speed = s
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > SPECTRAL_FLOOR * top)
        .map(|(j, _)| flow.group_speed(&s.spec().frequency(j)))
        .fold(0.0, f64::max);
    if speed == 0.0 {
        return f64::INFINITY;
    }
    0.5 * f.spec().extent() / speed
}

/// Empirical exceedance frequency of one `(t, α, x)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub probability: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub exceed_count: u64,
    pub ensemble_size: u64,
    pub t: f64,
    pub alpha: f64,
    pub x_index: usize,
    /// The bound's scale: `|t|` for flow deviations, a data norm otherwise.
    pub scale: f64,
}

impl TailEstimate {
    pub fn from_counts(exceed: u64, total: u64, t: f64, alpha: f64, x_index: usize, scale: f64) -> Self {
        let (ci_low, ci_high) = wilson_interval(exceed, total, Z_95);
        Self {
            probability: exceed as f64 / total as f64,
            ci_low,
            ci_high,
            exceed_count: exceed,
            ensemble_size: total,
            t,
            alpha,
            x_index,
            scale,
        }
    }

    /// Exceedance of each threshold by a sample of values.
    pub fn from_samples(samples: &[f64], thresholds: &[f64], scale: f64) -> Vec<Self> {
        thresholds
            .iter()
            .map(|&a| {
                let n = samples.iter().filter(|v| **v > a).count() as u64;
                Self::from_counts(n, samples.len() as u64, 0.0, a, 0, scale)
            })
            .collect()
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// Which quantity sets the scale of a Gaussian-tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Regime {
    /// `α/(C·e·|t|)`.
    FlowDeviation,
    /// `α/(C·e·‖h‖)` for a data norm `‖h‖`.
    DataSize { h_norm: f64 },
}

/// Constants of `C₁·exp(-(α/(C·e·scale))²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub c: f64,
    pub c1: f64,
    pub regime: Regime,
}

impl BoundParams {
    pub fn new(c: f64, c1: f64, regime: Regime) -> Result<Self> {
        if !(c > 0.0 && c1 > 0.0 && c.is_finite() && c1.is_finite()) {
            return Err(Error::Domain(format!("bound constants must be positive (C = {c}, C1 = {c1})")));
        }
        Ok(Self { c, c1, regime })
    }

    /// The scale used for an estimate under this regime.
    pub fn scale_for(&self, estimate: &TailEstimate) -> f64 {
        match self.regime {
            Regime::FlowDeviation => estimate.t.abs(),
            Regime::DataSize { h_norm } => h_norm,
        }
    }

    fn exponent(&self, alpha: f64, scale: f64) -> f64 {
        (alpha / (self.c * std::f64::consts::E * scale)).powi(2)
    }
}

/// `min(1, C₁·exp(-(α/(C·e·scale))²))`.
pub fn theoretical_bound(params: &BoundParams, alpha: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        return if alpha > 0.0 { 0.0 } else { params.c1.min(1.0) };
    }
    (params.c1 * (-params.exponent(alpha, scale)).exp()).min(1.0)
}

/// Result of a Gaussian-tail fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: BoundParams,
    pub r_squared: f64,
    pub cells: usize,
}

/// Least-squares fit of `-ln P` against `(α/scale)²` over cells with
/// `0 < P < 1`. The slope is `1/(C·e)²` and the intercept `-ln C₁`.
pub fn fit_constants(estimates: &[TailEstimate], regime: Regime) -> Result<FitReport> {
    let probe = BoundParams { c: 1.0, c1: 1.0, regime };
    let (xs, ys): (Vec<f64>, Vec<f64>) = estimates
        .iter()
        .filter(|e| e.probability > 0.0 && e.probability < 1.0)
        .filter_map(|e| {
            let s = probe.scale_for(e);
            (s > 0.0).then(|| ((e.alpha / s).powi(2), -e.probability.ln()))
        })
        .unzip();
    if xs.len() < 6 {
        return Err(Error::Unfittable(format!(
            "need at least 6 cells with 0 < P < 1, found {}",
            xs.len()
        )));
    }
    let fit = stats::fit_line(&xs, &ys)
        .ok_or_else(|| Error::Unfittable("all cells share one abscissa".into()))?;
    if !(fit.slope > 0.0) {
        return Err(Error::Unfittable(format!(
            "tail does not decay with the threshold (slope {})",
            fit.slope
        )));
    }
    let c = 1.0 / (std::f64::consts::E * fit.slope.sqrt());
    let c1 = (-fit.intercept).exp();
    Ok(FitReport {
        params: BoundParams::new(c, c1, regime)?,
        r_squared: fit.r_squared,
        cells: xs.len(),
    })
}

/// Raises `C₁` just enough that the bound lies above every `ci_high`.
pub fn dominate(params: &BoundParams, estimates: &[TailEstimate]) -> BoundParams {
    let mut c1 = params.c1;
    for e in estimates {
        let s = params.scale_for(e);
        if s > 0.0 {
            let needed = e.ci_high * params.exponent(e.alpha, s).exp();
            if needed.is_finite() {
                c1 = c1.max(needed * (1.0 + 1e-12));
            }
        }
    }
    BoundParams { c1, ..*params }
}

/// Whether `ci_high ≤ bound` for every cell.
pub fn dominates(params: &BoundParams, estimates: &[TailEstimate]) -> bool {
    estimates
        .iter()
        .all(|e| e.ci_high <= theoretical_bound(params, e.alpha, params.scale_for(e)))
}

/// `|S(t)f^ω(x) - f^ω(x)|` through the full transform pipeline.
pub fn pointwise_deviation(
    flow: &FlowKind,
    f: &Field,
    draw: &RandomDraw<'_>,
    t: f64,
    x_index: usize,
) -> Result<f64> {
    if x_index >= f.spec().len() {
        return Err(Error::Grid(format!("point index {x_index} out of range")));
    }
    let fr = randomize::randomize_field(f, draw)?;
    let evolved = propagators::evolve(&fr, flow, t)?;
    Ok((evolved.values()[x_index] - fr.values()[x_index]).norm())
}

/// Point coefficients `a_k` of a linear functional of the randomized field.
///
/// `weight(ξ)` multiplies `𝓕f(ξ)` before evaluation at `x`, so the value of
/// the functional on `f^ω` is `Σ_k g_k a_k`.
pub fn point_coefficients(
    spectrum: &Spectrum,
    lattice: &UnitLattice,
    x_index: usize,
    weight: impl Fn(&[f64; MAX_DIM]) -> Complex64,
) -> Vec<Complex64> {
    let spec = spectrum.spec();
    let x = spec.coords(x_index);
    let norm = (2.0 * std::f64::consts::PI).powf(-0.5 * spec.dim() as f64)
        * spec.frequency_cell_volume();
    let coeffs = spectrum.coeffs();
    (0..lattice.len())
        .map(|idx| {
            lattice
                .cell(idx)
                .iter()
                .map(|&(j, w)| {
                    if coeffs[j] == Complex64::new(0.0, 0.0) {
                        return Complex64::new(0.0, 0.0);
                    }
                    let xi = spec.frequency(j);
                    let phase: f64 = xi.iter().zip(&x).map(|(a, b)| a * b).sum();
                    Complex64::from_polar(w, phase) * weight(&xi) * coeffs[j]
                })
                .sum::<Complex64>()
                * norm
        })
        .collect()
}

/// Deviation coefficients `a_k(t, x)` for the flow.
pub fn deviation_coefficients(
    flow: &FlowKind,
    spectrum: &Spectrum,
    lattice: &UnitLattice,
    t: f64,
    x_index: usize,
) -> Vec<Complex64> {
    point_coefficients(spectrum, lattice, x_index, |xi| {
        flow.symbol(xi, t) - Complex64::new(1.0, 0.0)
    })
}

/// A set of linear functionals evaluated jointly over an ensemble.
struct LinearEnsemble {
    /// Lattice points with any nonzero coefficient.
    points: Vec<[i64; 3]>,
    /// One coefficient row per functional, restricted to `points`.
    rows: Vec<Vec<Complex64>>,
}

impl LinearEnsemble {
    fn new(lattice: &UnitLattice, full_rows: Vec<Vec<Complex64>>) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let active: Vec<usize> = (0..lattice.len())
            .filter(|&i| full_rows.iter().any(|r| r[i] != zero))
            .collect();
        Self {
            points: active.iter().map(|&i| lattice.points()[i]).collect(),
            rows: full_rows
                .iter()
                .map(|r| active.iter().map(|&i| r[i]).collect())
                .collect(),
        }
    }

    fn moduli(&self, seed: u64, sample: u64, out: &mut Vec<f64>) {
        let g: Vec<Complex64> = self
            .points
            .iter()
            .map(|k| gaussian_coefficient(seed, sample, k))
            .collect();
        out.clear();
        out.extend(
            self.rows
                .iter()
                .map(|r| r.iter().zip(&g).map(|(a, b)| a * b).sum::<Complex64>().norm()),
        );
    }

    /// Integer exceedance counts `[row][threshold]` over `samples` draws.
    fn exceedances(&self, seed: u64, samples: usize, thresholds: &[Vec<f64>]) -> Vec<Vec<u64>> {
        let zero = || thresholds.iter().map(|t| vec![0u64; t.len()]).collect::<Vec<_>>();
        (0..samples as u64)
            .into_par_iter()
            .fold(
                || (zero(), Vec::new()),
                |(mut acc, mut buf), m| {
                    self.moduli(seed, m, &mut buf);
                    for (r, v) in buf.iter().enumerate() {
                        for (c, a) in thresholds[r].iter().enumerate() {
                            acc[r][c] += u64::from(*v > *a);
                        }
                    }
                    (acc, buf)
                },
            )
            .map(|(acc, _)| acc)
            .reduce(zero, |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(b) {
                    for (x, y) in ra.iter_mut().zip(rb) {
                        *x += y;
                    }
                }
                a
            })
    }

    /// All moduli, `[sample][row]`.
    fn samples(&self, seed: u64, samples: usize) -> Vec<Vec<f64>> {
        (0..samples as u64)
            .into_par_iter()
            .map(|m| {
                let mut buf = Vec::new();
                self.moduli(seed, m, &mut buf);
                buf
            })
            .collect()
    }

    fn second_moments(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }
}

/// Outcome of [`estimate_tail`].
#[derive(Debug, Clone)]
pub struct TailReport {
    /// Cells ordered by time, then threshold, then observation point.
    pub estimates: Vec<TailEstimate>,
    pub warnings: Vec<String>,
}

/// Exceedance frequencies for every `(t, α, x)` cell.
pub fn estimate_tail(config: &TailExperimentConfig) -> Result<TailReport> {
    let warnings = config.validate()?;
    let spec = *config.data.spec();
    let lattice = UnitLattice::new(spec);
    let spectrum = grid::forward_transform(&config.data);
    let mut rows = Vec::new();
    for &t in &config.times {
        for &x in &config.observation_points {
            rows.push(deviation_coefficients(&config.flow, &spectrum, &lattice, t, x));
        }
    }
    let ensemble = LinearEnsemble::new(&lattice, rows);
    let thresholds = vec![config.thresholds.clone(); ensemble.rows.len()];
    let counts = ensemble.exceedances(config.seed, config.ensemble_size, &thresholds);
    let nx = config.observation_points.len();
    let mut estimates = Vec::new();
    for (ti, &t) in config.times.iter().enumerate() {
        for (ai, &alpha) in config.thresholds.iter().enumerate() {
            for (xi, &x) in config.observation_points.iter().enumerate() {
                let exceed = if t == 0.0 { 0 } else { counts[ti * nx + xi][ai] };
                estimates.push(TailEstimate::from_counts(
                    exceed,
                    config.ensemble_size as u64,
                    t,
                    alpha,
                    x,
                    t.abs(),
                ));
            }
        }
    }
    Ok(TailReport { estimates, warnings })
}

/// Ensemble samples of the deviation at each `(t, x)`, `[sample][t·nx + x]`.
pub fn deviation_samples(
    flow: &FlowKind,
    f: &Field,
    times: &[f64],
    points: &[usize],
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    flow.check_dim(f.spec().dim())?;
    let lattice = UnitLattice::new(*f.spec());
    let spectrum = grid::forward_transform(f);
    let rows = times
        .iter()
        .flat_map(|&t| points.iter().map(move |&x| (t, x)))
        .map(|(t, x)| deviation_coefficients(flow, &spectrum, &lattice, t, x))
        .collect();
    Ok(LinearEnsemble::new(&lattice, rows).samples(seed, samples))
}

/// `E|S(t)f^ω(x) - f^ω(x)|² = Σ_k |a_k(t, x)|²`.
pub fn deviation_second_moment(flow: &FlowKind, f: &Field, t: f64, x_index: usize) -> Result<f64> {
    flow.check_dim(f.spec().dim())?;
    let lattice = UnitLattice::new(*f.spec());
    let a = deviation_coefficients(flow, &grid::forward_transform(f), &lattice, t, x_index);
    Ok(a.iter().map(|v| v.norm_sqr()).sum())
}

/// A calibrated Gaussian-tail bound for one flow and datum.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub estimates: Vec<TailEstimate>,
    pub fit: FitReport,
    /// The fitted constants lifted to dominate every cell.
    pub params: BoundParams,
}

/// Threshold multipliers `√q` used by [`calibrate`]: `P ≈ e^{-q}`.
pub const CALIBRATION_QUANTILES: [f64; 9] = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];

/// Fits and dominates flow-deviation constants from a pilot ensemble.
///
/// Thresholds at each `t` are `α = s_t·√q`, where `s_t` is the pilot's
/// root-mean-square deviation, so every cell lands in the informative range.
pub fn calibrate(
    flow: &FlowKind,
    f: &Field,
    times: &[f64],
    x_index: usize,
    samples: usize,
    seed: u64,
) -> Result<Calibration> {
    let draws = deviation_samples(flow, f, times, &[x_index], samples, seed)?;
    let mut estimates = Vec::new();
    for (ti, &t) in times.iter().enumerate() {
        let column: Vec<f64> = draws.iter().map(|d| d[ti]).collect();
        let rms = (column.iter().map(|v| v * v).sum::<f64>() / column.len() as f64).sqrt();
        for q in CALIBRATION_QUANTILES {
            let alpha = rms * q.sqrt();
            let n = column.iter().filter(|v| **v > alpha).count() as u64;
            estimates.push(TailEstimate::from_counts(n, samples as u64, t, alpha, x_index, t.abs()));
        }
    }
    let fit = fit_constants(&estimates, Regime::FlowDeviation)?;
    let params = dominate(&fit.params, &estimates);
    Ok(Calibration { estimates, fit, params })
}

/// `α(ε) = C·e·ε·(ln(3C₁/ε))^{1/2}`.
pub fn schedule_alpha(params: &BoundParams, epsilon: f64) -> Result<f64> {
    let log = (3.0 * params.c1 / epsilon).ln();
    if !(log > 0.0) {
        return Err(Error::Domain(format!(
            "ln(3·C1/ε) must be positive (C1 = {}, ε = {epsilon})",
            params.c1
        )));
    }
    Ok(params.c * std::f64::consts::E * epsilon * log.sqrt())
}

/// One row of a convergence curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub t: f64,
    pub alpha: f64,
    pub estimate: TailEstimate,
    pub split: SplitParams,
    /// `‖h‖_{L²}` of the split at this `ε`.
    pub h_norm: f64,
}

/// Ensemble settings shared by the curve and density experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ensemble {
    pub samples: usize,
    pub seed: u64,
}

/// Empirical `P(|S(ε/2)f^ω(x) - f^ω(x)| > α(ε))` along an `ε`-schedule.
pub fn convergence_curve(
    flow: &FlowKind,
    f: &Field,
    epsilons: &[f64],
    params: &BoundParams,
    x_index: usize,
    ensemble: Ensemble,
) -> Result<Vec<ConvergenceRow>> {
    flow.check_dim(f.spec().dim())?;
    let lattice = UnitLattice::new(*f.spec());
    let spectrum = grid::forward_transform(f);
    let mut rows = Vec::with_capacity(epsilons.len());
    let mut coeffs = Vec::with_capacity(epsilons.len());
    let mut alphas = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let split = decompose::schwartz_split(f, eps)?;
        let t = 0.5 * eps;
        let alpha = schedule_alpha(params, eps)?;
        coeffs.push(deviation_coefficients(flow, &spectrum, &lattice, t, x_index));
        alphas.push(vec![alpha]);
        rows.push((eps, t, alpha, split.params, split.h_norm));
    }
    let counts = LinearEnsemble::new(&lattice, coeffs).exceedances(ensemble.seed, ensemble.samples, &alphas);
    Ok(rows
        .into_iter()
        .zip(counts)
        .map(|((epsilon, t, alpha, split, h_norm), c)| ConvergenceRow {
            epsilon,
            t,
            alpha,
            estimate: TailEstimate::from_counts(c[0], ensemble.samples as u64, t, alpha, x_index, t.abs()),
            split,
            h_norm,
        })
        .collect())
}

/// Constants for the two events of the density theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityConstants {
    pub c: f64,
    pub c1: f64,
}

impl DensityConstants {
    /// `λ = C·e·ε·(ln(C₁/ε))^{1/2}`.
    pub fn lambda(&self, epsilon: f64) -> Result<f64> {
        Ok(epsilon * self.level(epsilon)?)
    }

    /// `M = C·e·(ln(C₁/ε))^{1/2}`.
    pub fn level(&self, epsilon: f64) -> Result<f64> {
        let log = (self.c1 / epsilon).ln();
        if !(log > 0.0) {
            return Err(Error::Domain(format!(
                "ln(C1/ε) must be positive (C1 = {}, ε = {epsilon})",
                self.c1
            )));
        }
        Ok(self.c * std::f64::consts::E * log.sqrt())
    }
}

/// Outcome of [`density_event_probability`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub epsilon: f64,
    pub lambda: f64,
    pub level: f64,
    pub estimate: TailEstimate,
    /// Fraction of draws with `‖h^ω‖ ≤ λ`.
    pub h_event: f64,
    /// Fraction of draws meeting every seminorm condition.
    pub g_event: f64,
    pub split: SplitParams,
    pub h_norm: f64,
    pub base_seminorms: Vec<f64>,
}

/// Per-draw quantities of the density experiment: `‖h^ω‖` and the
/// seminorms of `g^ω` for each index pair.
pub fn density_samples(
    g: &Field,
    h: &Field,
    pairs: &[(MultiIndex, MultiIndex)],
    ensemble: Ensemble,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let lattice = UnitLattice::new(*g.spec());
    (0..ensemble.samples as u64)
        .into_par_iter()
        .map(|m| {
            let draw = RandomDraw::sample(ensemble.seed, m, &lattice);
            let hw = grid::l2_norm(&randomize::randomize_field(h, &draw)?);
            let gw = randomize::randomize_field(g, &draw)?;
            Ok((hw, decompose::decay_seminorms(&gw, pairs)?))
        })
        .collect()
}

/// `P(‖h^ω‖ ≤ λ and seminorm_{α,β}(g^ω) ≤ M·seminorm_{α,β}(g) for all pairs)`,
/// where `f = g + h` is the split at `ε`.
pub fn density_event_probability(
    f: &Field,
    epsilon: f64,
    pairs: &[(MultiIndex, MultiIndex)],
    constants: &DensityConstants,
    ensemble: Ensemble,
) -> Result<DensityReport> {
    let split = decompose::schwartz_split(f, epsilon)?;
    let lambda = constants.lambda(epsilon)?;
    let level = constants.level(epsilon)?;
    let base = decompose::decay_seminorms(&split.g, pairs)?;
    let draws = density_samples(&split.g, &split.h, pairs, ensemble)?;
    let (mut joint, mut h_ok, mut g_ok) = (0u64, 0u64, 0u64);
    for (hw, sw) in &draws {
        let hp = *hw <= lambda;
        let gp = sw.iter().zip(&base).all(|(s, b)| *s <= level * b);
        h_ok += u64::from(hp);
        g_ok += u64::from(gp);
        joint += u64::from(hp && gp);
    }
    let n = ensemble.samples as u64;
    Ok(DensityReport {
        epsilon,
        lambda,
        level,
        estimate: TailEstimate::from_counts(joint, n, 0.0, lambda, 0, split.h_norm),
        h_event: h_ok as f64 / n as f64,
        g_event: g_ok as f64 / n as f64,
        split: split.params,
        h_norm: split.h_norm,
        base_seminorms: base,
    })
}

/// Tail levels at which [`quantile_tail`] places its thresholds.
pub const TAIL_LEVELS: [f64; 8] = [0.5, 0.3, 0.2, 0.1, 0.05, 0.03, 0.02, 0.01];

/// Exceedance cells at the empirical `1 - p` quantiles for `p` in
/// [`TAIL_LEVELS`], with unit scale.
pub fn quantile_tail(samples: &[f64]) -> Vec<TailEstimate> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let thresholds: Vec<f64> = TAIL_LEVELS
        .iter()
        .map(|p| sorted[(((1.0 - p) * n as f64) as usize).min(n - 1)])
        .collect();
    TailEstimate::from_samples(samples, &thresholds, 1.0)
}

/// Pilot-ensemble constants for [`density_event_probability`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCalibration {
    pub constants: DensityConstants,
    /// Fit of the tail of `‖h^ω‖/‖h‖`, absent when `h = 0`.
    pub h_fit: Option<FitReport>,
    /// Fit of the tail of `max seminorm(g^ω)/seminorm(g)`, absent when `g = 0`.
    pub g_fit: Option<FitReport>,
}

/// Fits unit-scale Gaussian tails to the two ratios of the density event on a
/// pilot ensemble, lifts each to dominate its cells, and combines them with
/// the larger `C` and the larger `C₁`.
pub fn calibrate_density(
    f: &Field,
    epsilon: f64,
    pairs: &[(MultiIndex, MultiIndex)],
    pilot: Ensemble,
) -> Result<DensityCalibration> {
    let split = decompose::schwartz_split(f, epsilon)?;
    let base = decompose::decay_seminorms(&split.g, pairs)?;
    let draws = density_samples(&split.g, &split.h, pairs, pilot)?;
    let regime = Regime::DataSize { h_norm: 1.0 };
    let fit = |samples: Vec<f64>| -> Result<(FitReport, BoundParams)> {
        let cells = quantile_tail(&samples);
        let report = fit_constants(&cells, regime)?;
        let lifted = dominate(&report.params, &cells);
        Ok((report, lifted))
    };
    let h_fit = if split.h_norm > 0.0 {
        Some(fit(draws.iter().map(|(hw, _)| hw / split.h_norm).collect())?)
    } else {
        None
    };
    let g_fit = if base.iter().any(|b| *b > 0.0) {
        let ratios = draws
            .iter()
            .map(|(_, sw)| {
                sw.iter()
                    .zip(&base)
                    .filter(|(_, b)| **b > 0.0)
                    .map(|(s, b)| s / b)
                    .fold(0.0, f64::max)
            })
            .collect();
        Some(fit(ratios)?)
    } else {
        None
    };
    let lifted: Vec<BoundParams> = h_fit.iter().chain(&g_fit).map(|(_, p)| *p).collect();
    if lifted.is_empty() {
        return Err(Error::Unfittable("both parts of the split vanish".into()));
    }
    let constants = DensityConstants {
        c: lifted.iter().map(|p| p.c).fold(0.0, f64::max),
        c1: lifted.iter().map(|p| p.c1).fold(0.0, f64::max),
    };
    Ok(DensityCalibration {
        constants,
        h_fit: h_fit.map(|(r, _)| r),
        g_fit: g_fit.map(|(r, _)| r),
    })
}

/// One row of [`moment_growth_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub p: f64,
    pub norm: f64,
    /// `norm/√p`.
    pub ratio: f64,
}

/// Outcome of [`moment_growth_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    /// Flat index of the arg-max of `|x^α ∂^β g|`.
    pub x_index: usize,
    /// Closed form `Σ_k |x^α ∂^β P_k g(x)|²`.
    pub second_moment: f64,
    pub rows: Vec<MomentRow>,
}

/// Empirical `L^p_ω` norms of `x^α ∂^β g^ω` at the arg-max of `|x^α ∂^β g|`.
pub fn moment_growth_check(
    g: &Field,
    alpha: MultiIndex,
    beta: MultiIndex,
    p_list: &[f64],
    ensemble: Ensemble,
) -> Result<MomentReport> {
    if let Some(p) = p_list.iter().find(|p| !(**p >= 1.0)) {
        return Err(Error::Domain(format!("moment exponent must be >= 1 (got {p})")));
    }
    decompose::decay_seminorm(g, MultiIndex::ZERO, beta)?;
    let spec = *g.spec();
    let spectrum = grid::forward_transform(g);
    let d = grid::inverse_transform(&spectrum.multiply(|xi| beta.derivative_symbol(xi)));
    let (x_index, _) = d
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| (j, (alpha.monomial(&spec.coords(j)) * v).norm()))
        .fold((spec.origin(), 0.0), |best, c| if c.1 > best.1 { c } else { best });
    let weight = alpha.monomial(&spec.coords(x_index));
    let lattice = UnitLattice::new(spec);
    let row = point_coefficients(&spectrum, &lattice, x_index, |xi| {
        beta.derivative_symbol(xi) * weight
    });
    let ensemble_eval = LinearEnsemble::new(&lattice, vec![row]);
    let second_moment = ensemble_eval.second_moments()[0];
    let values: Vec<f64> = if ensemble_eval.points.is_empty() {
        vec![0.0; ensemble.samples]
    } else {
        ensemble_eval
            .samples(ensemble.seed, ensemble.samples)
            .into_iter()
            .map(|v| v[0])
            .collect()
    };
    let rows = p_list
        .iter()
        .map(|&p| {
            let norm = (values.iter().map(|v| v.powf(p)).sum::<f64>() / values.len() as f64).powf(1.0 / p);
            MomentRow { p, norm, ratio: norm / p.sqrt() }
        })
        .collect();
    Ok(MomentReport { x_index, second_moment, rows })
}
