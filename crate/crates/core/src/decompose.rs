//! Constructive density split `f = g + h` with `g` smooth and decaying and
//! `‖h‖_{L²} < ε`.
//!
//! Candidates are `g = χ_R · (G_σ * f)`: a Gaussian mollification of width `σ`
//! (the multiplier `e^{-σ²|ξ|²/2}` on the frequency side) followed by the
//! smooth cutoff `χ_R(x) = Σ_{|k| ≤ R} ψ(x - k)` built from the Wiener bump.
//! `χ_R` equals one on `|x| < R - 1` and vanishes outside `|x| < R + 1`.
//! The width shrinks and the radius grows by `√2` per step until the target
//! is met or `σ` drops below one grid cell.

use serde::{Deserialize, Serialize};

use crate::grid::{self, Field, MultiIndex, Spectrum, MAX_DIM};
use crate::wiener::bump_value;
use crate::{Complex64, Error, Result};

/// A split `f = g + h`.
#[derive(Debug, Clone)]
pub struct SchwartzSplit {
    pub g: Field,
    pub h: Field,
    /// Requested bound on `‖h‖_{L²}`.
    pub epsilon: f64,
    /// Achieved `‖h‖_{L²}`.
    pub h_norm: f64,
    pub params: SplitParams,
    /// `max sup_x |x^α ∂^β g|` over `|α|, |β| ≤ 2`.
    pub decay_report: f64,
    /// `‖h‖_{H^{8ε}}`, kept as a diagnostic.
    pub h_sobolev_8eps: f64,
}

/// Parameters of the accepted candidate, as recorded in manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitParams {
    /// Mollifier width; zero for the trivial split `g = 0`.
    pub sigma: f64,
    /// Cutoff radius; zero for the trivial split.
    pub radius: f64,
    pub iterations: usize,
    pub achieved_epsilon: f64,
}

/// `χ_R` sampled on the grid.
pub fn smooth_cutoff(spec: &grid::GridSpec, radius: f64) -> Vec<f64> {
    let dim = spec.dim();
    (0..spec.len())
        .map(|j| {
            let x = spec.coords(j);
            // Only k with |x - k| < 1 contribute.
            let mut acc = 0.0;
            let base: Vec<i64> = x[..dim].iter().map(|v| v.floor() as i64).collect();
            for mask in 0..1usize << dim {
                let mut r2 = 0.0;
                let mut eta = [0.0; MAX_DIM];
                for axis in 0..dim {
                    let k = base[axis] + ((mask >> axis) & 1) as i64;
                    r2 += (k * k) as f64;
                    eta[axis] = x[axis] - k as f64;
                }
                if r2.sqrt() <= radius {
                    acc += bump_value(&eta[..dim]);
                }
            }
            acc
        })
        .collect()
}

fn candidate(spectrum: &Spectrum, sigma: f64, radius: f64) -> Field {
    let s2 = sigma * sigma;
    let smoothed = spectrum.multiply(|xi| {
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        Complex64::new((-0.5 * s2 * r2).exp(), 0.0)
    });
    let g = grid::inverse_transform(&smoothed);
    let cutoff = smooth_cutoff(g.spec(), radius);
    let values = g.values().iter().zip(&cutoff).map(|(v, c)| v * c).collect();
    Field::new(*g.spec(), values).expect("cutoff has grid length")
}

/// Splits `f` into a smooth decaying part and an `L²`-small remainder.
pub fn schwartz_split(f: &Field, epsilon: f64) -> Result<SchwartzSplit> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive (got {epsilon})")));
    }
    let spec = *f.spec();
    let f_norm = grid::l2_norm(f);
    if epsilon > f_norm {
        let g = Field::zeros(spec);
        return finish(f, g, epsilon, SplitParams {
            sigma: 0.0,
            radius: 0.0,
            iterations: 0,
            achieved_epsilon: f_norm,
        });
    }

    let dx = spec.dx();
    let r_max = 0.5 * spec.extent() * (spec.dim() as f64).sqrt() + 1.0;
    let sigma0 = 0.5;
    let radius0 = (0.25 * spec.extent()).max(2.0);
    let spectrum = grid::forward_transform(f);
    let mut best = (f64::INFINITY, sigma0, radius0);

    for i in 0.. {
        let step = std::f64::consts::SQRT_2.powi(i as i32);
        let sigma = sigma0 / step;
        let radius = (radius0 * step).min(r_max);
        let g = candidate(&spectrum, sigma, radius);
        let err = grid::l2_norm(&(f - &g));
        if err < best.0 {
            best = (err, sigma, radius);
        }
        if err < epsilon {
            return finish(f, g, epsilon, SplitParams {
                sigma,
                radius,
                iterations: i + 1,
                achieved_epsilon: err,
            });
        }
        if sigma < dx && radius >= r_max {
            break;
        }
    }
    Err(Error::SplitFailed {
        target: epsilon,
        best: best.0,
        sigma: best.1,
        radius: best.2,
    })
}

fn finish(f: &Field, g: Field, epsilon: f64, params: SplitParams) -> Result<SchwartzSplit> {
    let h = f - &g;
    let h_norm = grid::l2_norm(&h);
    let decay_report = decay_report(&g)?;
    let h_sobolev_8eps = grid::sobolev_norm(&h, 8.0 * epsilon);
    Ok(SchwartzSplit {
        g,
        h,
        epsilon,
        h_norm,
        params,
        decay_report,
        h_sobolev_8eps,
    })
}

/// Every multi-index of order at most `max_order` in `dim` variables.
pub fn multi_indices(dim: usize, max_order: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let top = max_order + 1;
    for flat in 0..top.pow(dim as u32) {
        let mut a = [0u32; MAX_DIM];
        let mut rest = flat;
        for slot in a.iter_mut().take(dim) {
            *slot = rest % top;
            rest /= top;
        }
        let idx = MultiIndex(a);
        if idx.order() <= max_order {
            out.push(idx);
        }
    }
    out
}

fn derivative(spectrum: &Spectrum, beta: MultiIndex) -> Field {
    if beta == MultiIndex::ZERO {
        return grid::inverse_transform(spectrum);
    }
    grid::inverse_transform(&spectrum.multiply(|xi| beta.derivative_symbol(xi)))
}

fn check_beta(beta: MultiIndex) -> Result<()> {
    if beta.order() > 2 {
        return Err(Error::Domain(format!(
            "derivative order above 2 is not supported (got {})",
            beta.order()
        )));
    }
    Ok(())
}

fn weighted_sup(field: &Field, alpha: MultiIndex) -> f64 {
    let spec = field.spec();
    field
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| (alpha.monomial(&spec.coords(j)) * v).norm())
        .fold(0.0, f64::max)
}

/// `sup_x |x^α ∂^β g(x)|` over the grid, with spectral derivatives.
pub fn decay_seminorm(g: &Field, alpha: MultiIndex, beta: MultiIndex) -> Result<f64> {
    check_beta(beta)?;
    let d = derivative(&grid::forward_transform(g), beta);
    Ok(weighted_sup(&d, alpha))
}

/// [`decay_seminorm`] for several index pairs sharing one transform.
pub fn decay_seminorms(g: &Field, pairs: &[(MultiIndex, MultiIndex)]) -> Result<Vec<f64>> {
    let spectrum = grid::forward_transform(g);
    let mut cache: Vec<(MultiIndex, Field)> = Vec::new();
    let mut out = Vec::with_capacity(pairs.len());
    for &(alpha, beta) in pairs {
        check_beta(beta)?;
        let pos = match cache.iter().position(|(b, _)| *b == beta) {
            Some(p) => p,
            None => {
                cache.push((beta, derivative(&spectrum, beta)));
                cache.len() - 1
            }
        };
        out.push(weighted_sup(&cache[pos].1, alpha));
    }
    Ok(out)
}

fn decay_report(g: &Field) -> Result<f64> {
    let idx = multi_indices(g.spec().dim(), 2);
    let pairs: Vec<_> = idx
        .iter()
        .flat_map(|&a| idx.iter().map(move |&b| (a, b)))
        .collect();
    Ok(decay_seminorms(g, &pairs)?.into_iter().fold(0.0, f64::max))
}
