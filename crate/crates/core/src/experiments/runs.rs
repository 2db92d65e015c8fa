//! The computing subcommands: `khintchine`, `tails`, `convergence`, `density`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{RunConfig, ValidatedConfig};
use super::output::{timestamp, write_csv, write_json};
use super::Outcome;
use crate::propagators::FlowKind;
use crate::randomize::{self, khintchine_moment, EnsembleManifest};
use crate::tailprob::{
    self, theoretical_bound, BoundParams, Ensemble, FitReport, TailExperimentConfig,
    CALIBRATION_QUANTILES,
};
use crate::wiener::UnitLattice;
use crate::{Complex64, Result};

/// Seed of the pilot ensembles used for calibration, distinct from the main one.
pub fn pilot_seed(seed: u64) -> u64 {
    seed ^ 0x7069_6c6f_745f_7365
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KhintchineRow {
    pub vector: usize,
    pub kind: String,
    pub p: f64,
    pub moment: f64,
    pub ratio: f64,
}

pub fn khintchine(cfg: &ValidatedConfig) -> Result<Outcome> {
    let kh = &cfg.raw.khintchine;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for v in 0..kh.vectors {
        let units = kh.length.min(4).min(kh.vectors);
        let (kind, c): (&str, Vec<Complex64>) = if v < units {
            let mut c = vec![Complex64::new(0.0, 0.0); kh.length];
            c[v * kh.length / units] = Complex64::new(1.0, 0.0);
            ("unit", c)
        } else {
            let c: Vec<Complex64> = (0..kh.length)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            ("random", c.into_iter().map(|z| z / n).collect())
        };
        for &p in &kh.p {
            let moment = khintchine_moment(&c, p, kh.samples, cfg.seed.wrapping_add(v as u64))?;
            rows.push(KhintchineRow {
                vector: v,
                kind: kind.into(),
                p,
                moment,
                ratio: moment / p.sqrt(),
            });
        }
    }
    let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let dir = &cfg.raw.output_dir;
    let csv = write_csv(dir, "khintchine.csv", &cfg.hash, &rows)?;
    let mut lines = vec![format!("{:>6} {:>7} {:>5} {:>10} {:>8}", "vector", "kind", "p", "moment", "ratio")];
    lines.extend(rows.iter().map(|r| {
        format!("{:>6} {:>7} {:>5} {:>10.5} {:>8.5}", r.vector, r.kind, r.p, r.moment, r.ratio)
    }));
    lines.push(format!("max ratio to sqrt(p)·‖c‖: {worst:.4} ({})", randomize::NORMALIZATION));
    Ok(Outcome { lines, files: vec![csv], check_failed: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub flow: String,
    pub t: f64,
    pub alpha: f64,
    pub x_index: usize,
    pub exceed_count: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub prob: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
}

/// A fit recorded in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub flow: String,
    pub label: String,
    pub c: f64,
    /// `C₁` used for the bound column: lifted until the bound dominates every
    /// pilot cell and, for `tails`, every main-ensemble cell with exceedances.
    pub c1: f64,
    /// `C₁` lifted over the pilot cells only.
    pub c1_pilot: f64,
    /// `C₁` straight from the least-squares fit.
    pub c1_fitted: f64,
    pub r_squared: f64,
    pub cells: usize,
}

impl FitEntry {
    fn new(flow: &FlowKind, label: String, fit: &FitReport, lifted: &BoundParams) -> Self {
        Self {
            flow: flow.to_string(),
            label,
            c: lifted.c,
            c1: lifted.c1,
            c1_pilot: lifted.c1,
            c1_fitted: fit.params.c1,
            r_squared: fit.r_squared,
            cells: fit.cells,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest<T> {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub seed: u64,
    pub pilot_seed: u64,
    pub timestamp: u64,
    pub ensemble: EnsembleManifest,
    pub fits: Vec<FitEntry>,
    pub warnings: Vec<String>,
    pub details: T,
}

impl<T> Manifest<T> {
    fn new(command: &str, cfg: &ValidatedConfig, samples: usize, details: T) -> Self {
        let lattice = UnitLattice::new(cfg.spec);
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: cfg.hash.clone(),
            config: cfg.raw.clone(),
            seed: cfg.seed,
            pilot_seed: pilot_seed(cfg.seed),
            timestamp: timestamp(),
            ensemble: EnsembleManifest::new(cfg.seed, samples, &lattice),
            fits: Vec::new(),
            warnings: Vec::new(),
            details,
        }
    }
}

pub fn tails(cfg: &ValidatedConfig) -> Result<Outcome> {
    let raw = &cfg.raw;
    let pilot = pilot_seed(cfg.seed);
    let mut manifest = Manifest::new("tails", cfg, raw.ensemble_size, ());
    let mut rows = Vec::new();
    for flow in &cfg.flows {
        let mut params = Vec::new();
        let mut fit_slots = Vec::new();
        for &x in &cfg.observation_points {
            match tailprob::calibrate(flow, &cfg.data, &raw.times, x, raw.pilot_size, pilot) {
                Ok(cal) => {
                    fit_slots.push(Some(manifest.fits.len()));
                    manifest.fits.push(FitEntry::new(flow, format!("x_index={x}"), &cal.fit, &cal.params));
                    params.push(Some(cal.params));
                }
                Err(e) => {
                    manifest.warnings.push(format!("{flow} at x_index={x}: no bound ({e})"));
                    fit_slots.push(None);
                    params.push(None);
                }
            }
        }
        let thresholds = match &raw.alphas {
            Some(a) => a.clone(),
            None => default_thresholds(flow, cfg)?,
        };
        let report = tailprob::estimate_tail(&TailExperimentConfig {
            flow: flow.clone(),
            data: cfg.data.clone(),
            times: raw.times.clone(),
            thresholds,
            observation_points: cfg.observation_points.clone(),
            ensemble_size: raw.ensemble_size,
            seed: cfg.seed,
        })?;
        manifest.warnings.extend(report.warnings.iter().map(|w| format!("{flow}: {w}")));
        // The bound has to hold for the reported cells, not only the pilot
        // ones. Cells without exceedances carry no information about C1.
        for (xi, &x) in cfg.observation_points.iter().enumerate() {
            let (Some(p), Some(slot)) = (params[xi], fit_slots[xi]) else { continue };
            let cells: Vec<_> =
                report.estimates.iter().filter(|e| e.x_index == x && e.exceed_count > 0).cloned().collect();
            let lifted = tailprob::dominate(&p, &cells);
            manifest.fits[slot].c1 = lifted.c1;
            params[xi] = Some(lifted);
        }
        for e in report.estimates {
            let xi = cfg.observation_points.iter().position(|p| *p == e.x_index).unwrap_or(0);
            let bound = params[xi].map_or(f64::NAN, |p| theoretical_bound(&p, e.alpha, e.t.abs()));
            rows.push(TailRow {
                flow: flow.to_string(),
                t: e.t,
                alpha: e.alpha,
                x_index: e.x_index,
                exceed_count: e.exceed_count,
                m: e.ensemble_size,
                prob: e.probability,
                ci_low: e.ci_low,
                ci_high: e.ci_high,
                bound,
            });
        }
    }
    let dir = &raw.output_dir;
    let csv = write_csv(dir, "tails.csv", &cfg.hash, &rows)?;
    let json = write_json(dir, "tails_manifest.json", &manifest)?;
    let mut lines = vec![format!(
        "{:<16} {:>8} {:>11} {:>8} {:>8} {:>10} {:>10} {:>10}",
        "flow", "t", "alpha", "x_index", "exceed", "prob", "ci_high", "bound"
    )];
    lines.extend(rows.iter().map(|r| {
        format!(
            "{:<16} {:>8} {:>11.4e} {:>8} {:>8} {:>10.4e} {:>10.4e} {:>10.4e}",
            r.flow, r.t, r.alpha, r.x_index, r.exceed_count, r.prob, r.ci_high, r.bound
        )
    }));
    lines.extend(manifest.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(Outcome { lines, files: vec![csv, json], check_failed: false })
}

/// `α = s·√q` where `s` is the pilot RMS deviation at the largest `|t|` and the
/// first observation point.
fn default_thresholds(flow: &FlowKind, cfg: &ValidatedConfig) -> Result<Vec<f64>> {
    let t = cfg.raw.times.iter().copied().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
    let s = tailprob::deviation_second_moment(flow, &cfg.data, t, cfg.observation_points[0])?.sqrt();
    Ok(CALIBRATION_QUANTILES.iter().map(|q| s * q.sqrt()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCsvRow {
    pub flow: String,
    pub epsilon: f64,
    pub t: f64,
    pub alpha: f64,
    pub alpha_over_sqrt_epsilon: f64,
    pub x_index: usize,
    pub exceed_count: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub prob: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub c: f64,
    pub c1: f64,
    pub sigma: f64,
    pub radius: f64,
    pub h_norm: f64,
}

pub fn convergence(cfg: &ValidatedConfig) -> Result<Outcome> {
    let raw = &cfg.raw;
    let x = cfg.observation_points[0];
    let pilot = pilot_seed(cfg.seed);
    let times: Vec<f64> = raw.epsilons.iter().map(|e| 0.5 * e).collect();
    let mut manifest = Manifest::new("convergence", cfg, raw.ensemble_size, ());
    let mut rows = Vec::new();
    for flow in &cfg.flows {
        let cal = tailprob::calibrate(flow, &cfg.data, &times, x, raw.pilot_size, pilot)?;
        manifest.fits.push(FitEntry::new(flow, format!("x_index={x}"), &cal.fit, &cal.params));
        let curve = tailprob::convergence_curve(
            flow,
            &cfg.data,
            &raw.epsilons,
            &cal.params,
            x,
            Ensemble { samples: raw.ensemble_size, seed: cfg.seed },
        )?;
        for r in curve {
            rows.push(ConvergenceCsvRow {
                flow: flow.to_string(),
                epsilon: r.epsilon,
                t: r.t,
                alpha: r.alpha,
                alpha_over_sqrt_epsilon: r.alpha / r.epsilon.sqrt(),
                x_index: x,
                exceed_count: r.estimate.exceed_count,
                m: r.estimate.ensemble_size,
                prob: r.estimate.probability,
                ci_low: r.estimate.ci_low,
                ci_high: r.estimate.ci_high,
                c: cal.params.c,
                c1: cal.params.c1,
                sigma: r.split.sigma,
                radius: r.split.radius,
                h_norm: r.h_norm,
            });
        }
    }
    let dir = &raw.output_dir;
    let csv = write_csv(dir, "convergence.csv", &cfg.hash, &rows)?;
    let json = write_json(dir, "convergence_manifest.json", &manifest)?;
    let mut lines = vec![format!(
        "{:<16} {:>8} {:>8} {:>11} {:>11} {:>10} {:>10}",
        "flow", "epsilon", "t", "alpha", "alpha/√ε", "prob", "ci_high"
    )];
    lines.extend(rows.iter().map(|r| {
        format!(
            "{:<16} {:>8} {:>8} {:>11.4e} {:>11.4e} {:>10.4e} {:>10.4e}",
            r.flow, r.epsilon, r.t, r.alpha, r.alpha_over_sqrt_epsilon, r.prob, r.ci_high
        )
    }));
    Ok(Outcome { lines, files: vec![csv, json], check_failed: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCsvRow {
    pub epsilon: f64,
    pub lambda: f64,
    pub level: f64,
    pub successes: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub prob: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub target: f64,
    pub h_event: f64,
    pub g_event: f64,
    pub h_norm: f64,
    pub c: f64,
    pub c1: f64,
    pub sigma: f64,
    pub radius: f64,
}

pub fn density(cfg: &ValidatedConfig) -> Result<Outcome> {
    let raw = &cfg.raw;
    let pilot = Ensemble { samples: raw.pilot_size, seed: pilot_seed(cfg.seed) };
    let main = Ensemble { samples: raw.ensemble_size, seed: cfg.seed };
    let mut manifest = Manifest::new("density", cfg, raw.ensemble_size, Vec::<String>::new());
    manifest.details = cfg
        .indices
        .iter()
        .map(|(a, b)| format!("alpha={:?} beta={:?}", &a.0[..cfg.spec.dim()], &b.0[..cfg.spec.dim()]))
        .collect();
    let mut rows = Vec::new();
    for &eps in &raw.epsilons {
        let cal = tailprob::calibrate_density(&cfg.data, eps, &cfg.indices, pilot)?;
        for (label, fit) in [("h", &cal.h_fit), ("g", &cal.g_fit)] {
            if let Some(f) = fit {
                manifest.fits.push(FitEntry {
                    flow: "density".into(),
                    label: format!("{label} epsilon={eps}"),
                    c: f.params.c,
                    c1: cal.constants.c1,
                    c1_pilot: cal.constants.c1,
                    c1_fitted: f.params.c1,
                    r_squared: f.r_squared,
                    cells: f.cells,
                });
            }
        }
        let rep = tailprob::density_event_probability(&cfg.data, eps, &cfg.indices, &cal.constants, main)?;
        rows.push(DensityCsvRow {
            epsilon: eps,
            lambda: rep.lambda,
            level: rep.level,
            successes: rep.estimate.exceed_count,
            m: rep.estimate.ensemble_size,
            prob: rep.estimate.probability,
            ci_low: rep.estimate.ci_low,
            ci_high: rep.estimate.ci_high,
            target: 1.0 - 2.0 * eps,
            h_event: rep.h_event,
            g_event: rep.g_event,
            h_norm: rep.h_norm,
            c: cal.constants.c,
            c1: cal.constants.c1,
            sigma: rep.split.sigma,
            radius: rep.split.radius,
        });
    }
    let dir = &raw.output_dir;
    let csv = write_csv(dir, "density.csv", &cfg.hash, &rows)?;
    let json = write_json(dir, "density_manifest.json", &manifest)?;
    let mut lines = vec![format!(
        "{:>8} {:>11} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "epsilon", "lambda", "M_level", "prob", "ci_low", "1-2ε", "‖h‖"
    )];
    lines.extend(rows.iter().map(|r| {
        format!(
            "{:>8} {:>11.4e} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.2e}",
            r.epsilon, r.lambda, r.level, r.prob, r.ci_low, r.target, r.h_norm
        )
    }));
    Ok(Outcome { lines, files: vec![csv, json], check_failed: false })
}
