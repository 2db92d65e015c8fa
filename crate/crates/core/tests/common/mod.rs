//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use probconv::wiener::bump_value;
use probconv::{Complex64, Field, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// White-noise complex field with entries uniform in the unit square.
pub fn random_field(spec: GridSpec, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..spec.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Field::new(spec, values).unwrap()
}

/// Random smooth field: a Gaussian envelope times a random trigonometric sum.
pub fn random_smooth_field(spec: GridSpec, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = spec.dim();
    let terms: Vec<([f64; 3], Complex64)> = (0..6)
        .map(|_| {
            let mut w = [0.0; 3];
            for v in w.iter_mut().take(dim) {
                *v = rng.random_range(-2.0..2.0);
            }
            (w, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        })
        .collect();
    Field::from_fn(spec, |x| {
        let r2: f64 = x[..dim].iter().map(|v| v * v).sum();
        let env = (-0.5 * r2).exp();
        terms
            .iter()
            .map(|(w, c)| {
                let ph: f64 = w.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                c * Complex64::from_polar(env, ph)
            })
            .sum()
    })
}

/// `e^{-|x|²/2}`.
pub fn gaussian(spec: GridSpec) -> Field {
    let dim = spec.dim();
    Field::from_real_fn(spec, |x| (-0.5 * x[..dim].iter().map(|v| v * v).sum::<f64>()).exp())
}

/// `e^{iξ·x}` for a grid frequency `ξ` given by its mode indices.
pub fn pure_mode(spec: GridSpec, modes: &[i64]) -> (Field, [f64; 3]) {
    let mut xi = [0.0; 3];
    for (a, m) in modes.iter().enumerate() {
        xi[a] = *m as f64 * spec.dxi();
    }
    let f = Field::from_fn(spec, |x| {
        Complex64::from_polar(1.0, xi.iter().zip(x.iter()).map(|(a, b)| a * b).sum())
    });
    (f, xi)
}

/// `Σ_k ψ(ξ - k)²`, the variance of `Σ_k g_k ψ(ξ - k)`, from the bump itself.
pub fn bump_square_sum(xi: &[f64]) -> f64 {
    let dim = xi.len();
    let mut total = 0.0;
    let base: Vec<i64> = xi.iter().map(|v| v.floor() as i64 - 1).collect();
    for flat in 0..4usize.pow(dim as u32) {
        let eta: Vec<f64> = (0..dim)
            .map(|a| xi[a] - (base[a] + ((flat / 4usize.pow(a as u32)) % 4) as i64) as f64)
            .collect();
        total += bump_value(&eta).powi(2);
    }
    total
}
