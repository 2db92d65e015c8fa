//! Invariant suites behind `check-wiener` and `check-propagators`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{self, Field, GridSpec, MultiIndex};
use crate::propagators::{evolve, fractional_multiplier, FlowKind, MultiplierKind};
use crate::wiener::{self, partition_sum, unit_ball_volume, UnitLattice};
use crate::{Complex64, Result};

/// One line of a check table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub note: String,
}

impl CheckRow {
    fn at_most(check: impl Into<String>, value: f64, threshold: f64, note: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            value,
            threshold,
            passed: value <= threshold,
            note: note.into(),
        }
    }
}

/// Complex white noise with entries uniform in the unit square.
pub fn white_noise(spec: GridSpec, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..spec.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Field::new(spec, values).expect("length matches grid")
}

fn gaussian(spec: GridSpec) -> Field {
    let dim = spec.dim();
    Field::from_real_fn(spec, |x| (-0.5 * x[..dim].iter().map(|v| v * v).sum::<f64>()).exp())
}

fn check_grids() -> [GridSpec; 3] {
    [
        GridSpec::new(1, 64, 20.0).expect("valid grid"),
        GridSpec::new(2, 32, 32.0).expect("valid grid"),
        GridSpec::new(3, 16, 32.0).expect("valid grid"),
    ]
}

fn sig(s: &str) -> FlowKind {
    FlowKind::Schrodinger(s.parse().expect("valid signature"))
}

fn max_square_ratio(spec: GridSpec, flow: Option<&FlowKind>, seed: u64, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for trial in 0..trials as u64 {
        let f = white_noise(spec, seed.wrapping_add(trial));
        let norm = grid::l2_norm(&f);
        for t in [0.0, 0.1, 1.0] {
            let sf = match flow {
                None => wiener::square_function(&f),
                Some(k) => wiener::square_function_evolved(&f, k, t)?,
            };
            worst = worst.max(sf.max_abs() / norm);
        }
    }
    Ok(worst)
}

/// Partition of unity, reconstruction, square-function bounds, weighted tail
/// sums and the unit-scale Bernstein constant.
pub fn wiener_checks(seed: u64, trials: usize) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for dim in 1..=3 {
        let worst = (0..10_000)
            .map(|_| {
                let xi: Vec<f64> = (0..dim).map(|_| rng.random_range(-6.0..6.0)).collect();
                (partition_sum(&xi) - 1.0).abs()
            })
            .fold(0.0, f64::max);
        rows.push(CheckRow::at_most(format!("partition-of-unity n={dim}"), worst, 1e-12, "10000 random ξ"));
    }
    for spec in check_grids() {
        let lattice = UnitLattice::new(spec);
        let mut worst: f64 = 0.0;
        for trial in 0..trials as u64 {
            let f = white_noise(spec, seed ^ (100 + trial));
            let sum = wiener::projections(&f, &lattice)?
                .iter()
                .fold(Field::zeros(spec), |acc, p| &acc + p);
            worst = worst.max(grid::l2_norm(&(&sum - &f)) / grid::l2_norm(&f));
        }
        rows.push(CheckRow::at_most(
            format!("reconstruction n={}", spec.dim()),
            worst,
            1e-10,
            format!("{trials} random fields, relative L² error"),
        ));
    }
    for spec in check_grids() {
        let n = spec.dim();
        let worst = max_square_ratio(spec, None, seed ^ 200, trials)?;
        rows.push(CheckRow::at_most(format!("square-fn n={n}"), worst, 1.0 + 1e-9, "max SF(f)/‖f‖"));
        let slack = unit_ball_volume(n).sqrt();
        rows.push(CheckRow::at_most(
            format!("square-fn-ball n={n}"),
            worst,
            slack * (1.0 + 1e-9),
            format!("variant with vol(B)^(1/2) = {slack:.4}"),
        ));
    }
    let [g1, g2, g3] = check_grids();
    for (name, spec, flow) in [
        ("square-fn-evolved kdv", g1, FlowKind::Kdv),
        ("square-fn-evolved wave-half n=2", g2, FlowKind::WaveHalfSum),
        ("square-fn-evolved wave-half n=3", g3, FlowKind::WaveHalfSum),
        ("square-fn-evolved schrodinger:++", g2, sig("++")),
        ("square-fn-evolved schrodinger:+-", g2, sig("+-")),
        ("square-fn-evolved schrodinger:+-+", g3, sig("+-+")),
    ] {
        let worst = max_square_ratio(spec, Some(&flow), seed ^ 300, trials)?;
        rows.push(CheckRow::at_most(name, worst, 1.0 + 1e-9, "max SF(S(t)f)/‖f‖, t ∈ {0, 0.1, 1}"));
    }

    let spec = GridSpec::new(1, 256, 40.0)?;
    let g = gaussian(spec);
    let z = MultiIndex::ZERO;
    let t2 = wiener::weighted_tail_sum(&g, z, z, 2.0)?;
    let t3 = wiener::weighted_tail_sum(&g, z, z, 3.0)?;
    rows.push(CheckRow {
        check: "tail-sum α=β=0".into(),
        value: t3,
        threshold: t2,
        passed: t3.is_finite() && t3 <= t2,
        note: "k_min = 3 sum is finite and at most the k_min = 2 sum".into(),
    });
    let one = MultiIndex::new(&[1]);
    let tails: Vec<f64> = [3.0, 6.0, 12.0]
        .iter()
        .map(|&k| wiener::weighted_tail_sum(&g, one, one, k))
        .collect::<Result<_>>()?;
    rows.push(CheckRow {
        check: "tail-sum α=β=1".into(),
        value: tails[0],
        threshold: f64::INFINITY,
        passed: tails.iter().all(|v| v.is_finite()) && tails[0] >= tails[1] && tails[1] >= tails[2],
        note: format!("k_min = 3, 6, 12: {:.3e}, {:.3e}, {:.3e}", tails[0], tails[1], tails[2]),
    });
    let spec2 = GridSpec::new(2, 64, 32.0)?;
    let g2d = gaussian(spec2);
    let (a, b) = (MultiIndex::new(&[1, 0]), MultiIndex::new(&[0, 1]));
    let tails: Vec<f64> = [2.0, 3.0, 4.0]
        .iter()
        .map(|&k| wiener::weighted_tail_sum(&g2d, a, b, k))
        .collect::<Result<_>>()?;
    rows.push(CheckRow {
        check: "tail-sum n=2".into(),
        value: tails[0],
        threshold: f64::INFINITY,
        passed: tails.iter().all(|v| v.is_finite()) && tails[0] >= tails[1] && tails[1] >= tails[2],
        note: format!("α=(1,0), β=(0,1), k_min = 2, 3, 4: {:.3e}, {:.3e}, {:.3e}", tails[0], tails[1], tails[2]),
    });

    let mut fitted = Vec::new();
    let mut within = true;
    for n in [64, 128, 256] {
        let spec = GridSpec::new(1, n, 20.0)?;
        let lattice = UnitLattice::new(spec);
        let mut worst: f64 = 0.0;
        for trial in 0..trials.min(5) as u64 {
            let f = white_noise(spec, seed ^ (400 + trial));
            for idx in 0..lattice.len() {
                if let Some(r) = wiener::bernstein_ratio(&f, &lattice, idx)? {
                    within &= r <= wiener::bernstein_constant(&lattice, idx) * (1.0 + 1e-12);
                    worst = worst.max(r);
                }
            }
        }
        fitted.push(worst);
    }
    let c = fitted.iter().copied().fold(0.0, f64::max);
    let spread = c / fitted.iter().copied().fold(f64::INFINITY, f64::min);
    rows.push(CheckRow {
        check: "bernstein n=1".into(),
        value: spread,
        threshold: 1.5,
        passed: within && spread <= 1.5,
        note: format!(
            "spread of fitted C = {c:.4} across N = 64, 128, 256 ({:.4}, {:.4}, {:.4}); every ratio within its Cauchy-Schwarz constant: {within}",
            fitted[0], fitted[1], fitted[2]
        ),
    });
    Ok(rows)
}

/// KdV at `x = 0` by direct summation against the exact transform `e^{-ξ²/2}`.
pub fn kdv_direct_sum_error(t: f64) -> Result<f64> {
    let spec = GridSpec::new(1, 256, 40.0)?;
    let dxi = spec.dxi();
    let half = (spec.samples_per_axis() / 2) as i64;
    let direct: Complex64 = (-half..half)
        .map(|m| {
            let xi = m as f64 * dxi;
            Complex64::from_polar((-0.5 * xi * xi).exp(), t * xi.powi(3))
        })
        .sum::<Complex64>()
        * dxi
        / (2.0 * PI).sqrt();
    let u = evolve(&gaussian(spec), &FlowKind::Kdv, t)?;
    Ok((u.values()[spec.origin()] - direct).norm())
}

/// Unitarity, group law, identity at `t = 0`, contraction, small-time symbol
/// bounds, the KdV oracle and fractional multiplier weights.
pub fn propagator_checks(seed: u64, trials: usize) -> Result<Vec<CheckRow>> {
    let g1 = GridSpec::new(1, 256, 40.0)?;
    let g2 = GridSpec::new(2, 32, 16.0)?;
    let kinds = [
        (g1, FlowKind::Kdv),
        (g2, FlowKind::WavePlus),
        (g2, FlowKind::WaveMinus),
        (g2, FlowKind::WaveHalfSum),
        (g2, sig("++")),
        (g2, sig("+-")),
    ];
    let mut rows = Vec::new();
    for (ki, (spec, flow)) in kinds.iter().enumerate() {
        let (mut unit, mut group, mut ident): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for trial in 0..trials as u64 {
            let f = white_noise(*spec, seed ^ ((ki as u64) << 32 | trial));
            let n0 = grid::l2_norm(&f);
            ident = ident.max((&evolve(&f, flow, 0.0)? - &f).max_abs());
            for t in [0.1, 1.0, 10.0] {
                let n = grid::l2_norm(&evolve(&f, flow, t)?) / n0;
                unit = unit.max(if flow.is_unitary() { (n - 1.0).abs() } else { n - 1.0 });
            }
            if flow.is_unitary() {
                let two = evolve(&evolve(&f, flow, 0.3)?, flow, 0.7)?;
                group = group.max((&two - &evolve(&f, flow, 1.0)?).max_abs() / f.max_abs());
            }
        }
        rows.push(CheckRow::at_most(format!("identity {flow}"), ident, 1e-12, "max |S(0)f - f|"));
        if flow.is_unitary() {
            rows.push(CheckRow::at_most(format!("unitarity {flow}"), unit, 1e-10, "relative norm change"));
            rows.push(CheckRow::at_most(format!("group-law {flow}"), group, 1e-10, "S(0.7)S(0.3) vs S(1)"));
        } else {
            rows.push(CheckRow::at_most(format!("contraction {flow}"), unit, 1e-12, "‖S(t)f‖/‖f‖ - 1"));
        }
        let mut ratio: f64 = 0.0;
        for t in [1e-3, 1e-2, 0.1, 1.0] {
            for j in 0..spec.len() {
                let xi = spec.frequency(j);
                let b = flow.small_time_bound(&xi, t);
                if b > 0.0 {
                    ratio = ratio.max((flow.symbol(&xi, t) - 1.0).norm() / b);
                }
            }
        }
        rows.push(CheckRow::at_most(
            format!("small-time-bound {flow}"),
            ratio,
            1.0 + 1e-12,
            "max |m_t(ξ) - 1| / first-order bound",
        ));
    }
    rows.push(CheckRow::at_most(
        "kdv-direct-sum",
        kdv_direct_sum_error(0.01)?,
        1e-8,
        "Gaussian data, t = 0.01, x = 0, N = 256",
    ));
    let spec = GridSpec::new(1, 64, 20.0)?;
    let xi0 = 7.0 * spec.dxi();
    let mode = Field::from_fn(spec, |x| Complex64::from_polar(1.0, xi0 * x[0]));
    let out = fractional_multiplier(&mode, 1.0 / 3.0, &MultiplierKind::TimeKdv)?;
    rows.push(CheckRow::at_most(
        "fractional time-kdv a=1/3",
        (&out - &mode.scale(Complex64::new(xi0, 0.0))).max_abs(),
        1e-12,
        "pure mode scaled by |ξ₀|",
    ));
    Ok(rows)
}
