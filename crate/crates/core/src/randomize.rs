//! Counter-based complex Gaussian coefficients and the randomization map
//! `f^ω = Σ_k g_k(ω) ψ(D - k) f`.
//!
//! Every coefficient is a pure function of `(seed, sample, k)`: the triple is
//! hashed into a key that seeds its own ChaCha stream. Ensembles are therefore
//! independent of evaluation order and thread count.
//!
//! Normalization: `g_k = (X + iY)/√2` with `X, Y` independent standard normals,
//! so `E|g_k|² = 1`, `E|g_k|⁴ = 2`, and each real component satisfies
//! `E exp(γ X/√2) = exp(γ²/4)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{self, Field, Spectrum};
use crate::wiener::{check_lattice, LatticePoint, UnitLattice};
use crate::{Complex64, Error, Result};

/// Sub-Gaussian constant `c` of each real component under this normalization.
pub const SUB_GAUSSIAN_CONSTANT: f64 = 0.25;

/// Human-readable normalization recorded in manifests.
pub const NORMALIZATION: &str = "g_k = (X + iY)/sqrt(2), X,Y iid N(0,1); E|g_k|^2 = 1";

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn coefficient_key(seed: u64, sample: u64, k: &LatticePoint) -> u64 {
    let mut h = splitmix(seed);
    h = splitmix(h ^ sample);
    for &v in k {
        h = splitmix(h ^ v as u64);
    }
    h
}

/// The coefficient `g_k` of ensemble member `sample` under `seed`.
pub fn gaussian_coefficient(seed: u64, sample: u64, k: &LatticePoint) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(coefficient_key(seed, sample, k));
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
}

/// Parses a seed given either in decimal or as `0x`-prefixed hex.
pub fn parse_seed(s: &str) -> Result<u64> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| Error::Config(format!("seed `{s}` is neither decimal nor 0x-hex")))
}

/// One realization `k ↦ g_k(ω)` over a unit lattice.
#[derive(Debug, Clone)]
pub struct RandomDraw<'a> {
    seed: u64,
    sample: u64,
    lattice: &'a UnitLattice,
    coefficients: Vec<Complex64>,
}

impl<'a> RandomDraw<'a> {
    /// Ensemble member 0 of `seed`.
    pub fn new(seed: u64, lattice: &'a UnitLattice) -> Self {
        Self::sample(seed, 0, lattice)
    }

    /// Ensemble member `sample` of `seed`.
    pub fn sample(seed: u64, sample: u64, lattice: &'a UnitLattice) -> Self {
        let coefficients = lattice
            .points()
            .iter()
            .map(|k| gaussian_coefficient(seed, sample, k))
            .collect();
        Self {
            seed,
            sample,
            lattice,
            coefficients,
        }
    }

    /// Test hook: every `g_k = 1`, so randomization reproduces the input.
    #[doc(hidden)]
    pub fn unit(lattice: &'a UnitLattice) -> Self {
        Self {
            seed: 0,
            sample: 0,
            lattice,
            coefficients: vec![Complex64::new(1.0, 0.0); lattice.len()],
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample_index(&self) -> u64 {
        self.sample
    }

    pub fn lattice(&self) -> &'a UnitLattice {
        self.lattice
    }

    /// Coefficients in lattice order.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficient(&self, k: &[i64]) -> Option<Complex64> {
        self.lattice.index_of(k).map(|i| self.coefficients[i])
    }

    /// Frequency multiplier `Σ_k g_k ψ(ξ_j - k)` at every grid frequency.
    pub fn multiplier(&self) -> Vec<Complex64> {
        let mut m = vec![Complex64::new(0.0, 0.0); self.lattice.spec().len()];
        for (idx, g) in self.coefficients.iter().enumerate() {
            for &(j, w) in self.lattice.cell(idx) {
                m[j] += g * w;
            }
        }
        m
    }
}

/// `f^ω` on the frequency side.
pub fn randomize_spectrum(s: &Spectrum, d: &RandomDraw<'_>) -> Result<Spectrum> {
    check_lattice(s.spec(), d.lattice)?;
    let m = d.multiplier();
    let coeffs = s.coeffs().iter().zip(&m).map(|(c, w)| c * w).collect();
    Spectrum::new(*s.spec(), coeffs)
}

/// `f^ω = Σ_k g_k ψ(D - k) f`.
pub fn randomize_field(f: &Field, d: &RandomDraw<'_>) -> Result<Field> {
    check_lattice(f.spec(), d.lattice)?;
    let s = grid::forward_transform(f);
    Ok(grid::inverse_transform(&randomize_spectrum(&s, d)?))
}

/// Monte Carlo estimate of `‖Σ_k g_k c_k‖_{L^p_ω}` with `samples` draws.
pub fn khintchine_moment(c: &[Complex64], p: f64, samples: usize, seed: u64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::Domain(format!("moment exponent must be >= 2 (got {p})")));
    }
    if samples < 1000 {
        return Err(Error::Domain(format!(
            "at least 1000 samples are required (got {samples})"
        )));
    }
    if c.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Ok(0.0);
    }
    let values = series_moduli(c, samples, seed);
    let sum: f64 = values.iter().map(|v| v.powf(p)).sum();
    Ok((sum / samples as f64).powf(1.0 / p))
}

/// `|Σ_k g_k^{(m)} c_k|` for `m = 0..samples`, with `c_k` keyed by its position.
pub fn series_moduli(c: &[Complex64], samples: usize, seed: u64) -> Vec<f64> {
    (0..samples as u64)
        .into_par_iter()
        .map(|m| {
            c.iter()
                .enumerate()
                .map(|(i, ck)| gaussian_coefficient(seed, m, &[i as i64, 0, 0]) * ck)
                .sum::<Complex64>()
                .norm()
        })
        .collect()
}

/// Provenance of an ensemble, written next to results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub seed: u64,
    pub samples: usize,
    pub lattice_digest: String,
    pub lattice_points: usize,
    pub normalization: String,
}

impl EnsembleManifest {
    pub fn new(seed: u64, samples: usize, lattice: &UnitLattice) -> Self {
        Self {
            seed,
            samples,
            lattice_digest: lattice.digest(),
            lattice_points: lattice.len(),
            normalization: NORMALIZATION.to_string(),
        }
    }
}
