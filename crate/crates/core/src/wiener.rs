//! Unit-scale frequency decomposition.
//!
//! The bump `ψ` is the standard mollifier `φ(ξ) = exp(-1/(1-|ξ|²))` divided by
//! its own lattice sum `Σ_k φ(ξ-k)`. That makes `Σ_k ψ(ξ-k) = 1` an identity,
//! keeps `supp ψ ⊂ B(0,1)`, and leaves `ψ` even and nonnegative. The lattice
//! sum never vanishes for `dim ≤ 3` because every point is within `√dim/2 < 1`
//! of some integer vector.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::grid::{self, Field, GridSpec, MultiIndex, Spectrum, MAX_DIM};
use crate::propagators::{self, FlowKind};
use crate::{Complex64, Error, Result};

/// Integer frequency vector `k ∈ ℤ^dim`; unused axes are zero.
pub type LatticePoint = [i64; MAX_DIM];

/// Value, gradient and Hessian of a scalar function of `ξ`.
#[derive(Debug, Clone, Copy, Default)]
struct Jet {
    value: f64,
    grad: [f64; MAX_DIM],
    hess: [[f64; MAX_DIM]; MAX_DIM],
}

impl Jet {
    fn accumulate(&mut self, other: &Jet) {
        self.value += other.value;
        for j in 0..MAX_DIM {
            self.grad[j] += other.grad[j];
            for l in 0..MAX_DIM {
                self.hess[j][l] += other.hess[j][l];
            }
        }
    }
}

fn norm_sqr(eta: &[f64]) -> f64 {
    eta.iter().map(|v| v * v).sum()
}

/// `φ(η) = exp(-1/(1-|η|²))` inside the unit ball, zero outside.
fn mollifier(eta: &[f64]) -> f64 {
    let u = 1.0 - norm_sqr(eta);
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

fn mollifier_jet(eta: &[f64; MAX_DIM], dim: usize) -> Jet {
    let mut jet = Jet::default();
    let u = 1.0 - norm_sqr(&eta[..dim]);
    if u <= 0.0 {
        return jet;
    }
    let phi = (-1.0 / u).exp();
    if phi == 0.0 {
        return jet;
    }
    let u2 = u * u;
    let u3 = u2 * u;
    let mut a = [0.0; MAX_DIM];
    for j in 0..dim {
        a[j] = -2.0 * eta[j] / u2;
    }
    jet.value = phi;
    for j in 0..dim {
        jet.grad[j] = phi * a[j];
        for l in 0..dim {
            let delta = if j == l { 2.0 / u2 } else { 0.0 };
            jet.hess[j][l] = phi * (a[j] * a[l] - delta - 8.0 * eta[j] * eta[l] / u3);
        }
    }
    jet
}

/// Integer vectors `k` that can satisfy `|ξ - k| < 1`.
fn neighbours(xi: &[f64]) -> impl Iterator<Item = LatticePoint> + '_ {
    let dim = xi.len();
    let mut base = [0i64; MAX_DIM];
    for (b, &x) in base.iter_mut().zip(xi) {
        *b = x.floor() as i64;
    }
    (0..1usize << dim).map(move |mask| {
        let mut k = [0i64; MAX_DIM];
        for axis in 0..dim {
            k[axis] = base[axis] + ((mask >> axis) & 1) as i64;
        }
        k
    })
}

fn shifted(xi: &[f64], k: &LatticePoint) -> [f64; MAX_DIM] {
    let mut eta = [0.0; MAX_DIM];
    for (axis, &x) in xi.iter().enumerate() {
        eta[axis] = x - k[axis] as f64;
    }
    eta
}

/// `Σ_k φ(ξ - k)`, the normalizer of the bump.
fn lattice_mollifier_sum(xi: &[f64]) -> f64 {
    neighbours(xi)
        .map(|k| mollifier(&shifted(xi, &k)[..xi.len()]))
        .sum()
}

fn check_dim(xi: &[f64]) {
    assert!(
        (1..=MAX_DIM).contains(&xi.len()),
        "bump is defined for dimensions 1 to 3"
    );
}

/// The bump `ψ(ξ)`; the dimension is `xi.len()`.
pub fn bump_value(xi: &[f64]) -> f64 {
    check_dim(xi);
    let phi = mollifier(xi);
    if phi == 0.0 {
        return 0.0;
    }
    phi / lattice_mollifier_sum(xi)
}

/// `Σ_{k ∈ ℤ^n} ψ(ξ - k)`. Identically one up to rounding.
pub fn partition_sum(xi: &[f64]) -> f64 {
    check_dim(xi);
    neighbours(xi)
        .map(|k| bump_value(&shifted(xi, &k)[..xi.len()]))
        .sum()
}

/// Analytic `∂^β ψ(ξ)` for `|β| ≤ 2`, by the quotient rule on `φ / Σ_k φ(· - k)`.
pub fn bump_derivative(xi: &[f64], beta: MultiIndex) -> Result<f64> {
    check_dim(xi);
    let dim = xi.len();
    if beta.0[dim..].iter().any(|&b| b != 0) {
        return Err(Error::Domain(format!(
            "derivative index {beta:?} has components beyond dimension {dim}"
        )));
    }
    let order = beta.order();
    if order > 2 {
        return Err(Error::Domain(format!(
            "bump derivatives are available up to order 2 (got {order})"
        )));
    }
    let mut point = [0.0; MAX_DIM];
    point[..dim].copy_from_slice(xi);
    let phi = mollifier_jet(&point, dim);
    if phi.value == 0.0 {
        return Ok(0.0);
    }
    let mut denom = Jet::default();
    for k in neighbours(xi) {
        denom.accumulate(&mollifier_jet(&shifted(xi, &k), dim));
    }
    let d = denom.value;
    let psi = phi.value / d;
    let psi_grad = |j: usize| (phi.grad[j] - psi * denom.grad[j]) / d;
    let axes: Vec<usize> = (0..dim)
        .flat_map(|j| std::iter::repeat_n(j, beta.0[j] as usize))
        .collect();
    Ok(match axes.as_slice() {
        [] => psi,
        [j] => psi_grad(*j),
        [j, l] => {
            let (j, l) = (*j, *l);
            (phi.hess[j][l]
                - psi_grad(j) * denom.grad[l]
                - psi_grad(l) * denom.grad[j]
                - psi * denom.hess[j][l])
                / d
        }
        _ => unreachable!(),
    })
}

/// Volume of the unit ball in `ℝ^dim`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Every `k ∈ ℤ^dim` whose unit ball reaches the grid's frequency box, in
/// lexicographic order, with the grid frequencies each one touches.
#[derive(Debug, Clone)]
pub struct UnitLattice {
    spec: GridSpec,
    points: Vec<LatticePoint>,
    /// Per lattice point: `(spectrum flat index, ψ(ξ - k))` for `|ξ - k| < 1`.
    cells: Vec<Vec<(usize, f64)>>,
}

impl UnitLattice {
    pub fn new(spec: GridSpec) -> Self {
        let dim = spec.dim();
        let (lo, hi) = spec.frequency_box();
        let kmin = (lo - 1.0).ceil() as i64;
        let kmax = (hi + 1.0).floor() as i64;
        let width = (kmax - kmin + 1) as usize;

        let mut points = Vec::new();
        for flat in 0..width.pow(dim as u32) {
            let mut k = [0i64; MAX_DIM];
            let mut rest = flat;
            for axis in (0..dim).rev() {
                k[axis] = kmin + (rest % width) as i64;
                rest /= width;
            }
            let dist2: f64 = k[..dim]
                .iter()
                .map(|&ka| {
                    let ka = ka as f64;
                    let d = (lo - ka).max(ka - hi).max(0.0);
                    d * d
                })
                .sum();
            if dist2 < 1.0 {
                points.push(k);
            }
        }

        let index: HashMap<LatticePoint, usize> =
            points.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let mut cells = vec![Vec::new(); points.len()];
        for j in 0..spec.len() {
            let xi = spec.frequency(j);
            let xi = &xi[..dim];
            let denom = lattice_mollifier_sum(xi);
            for k in neighbours(xi) {
                let phi = mollifier(&shifted(xi, &k)[..dim]);
                if phi > 0.0 {
                    let idx = index[&k];
                    cells[idx].push((j, phi / denom));
                }
            }
        }
        Self {
            spec,
            points,
            cells,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        let mut key = [0i64; MAX_DIM];
        key[..k.len()].copy_from_slice(k);
        self.points.binary_search(&key).ok()
    }

    /// Grid frequencies in the unit ball around lattice point `idx`, with `ψ(ξ - k)`.
    pub fn cell(&self, idx: usize) -> &[(usize, f64)] {
        &self.cells[idx]
    }

    /// `Σ_k ψ(ξ_j - k)` over listed points, for every grid frequency.
    pub fn coverage(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.spec.len()];
        for cell in &self.cells {
            for &(j, w) in cell {
                sum[j] += w;
            }
        }
        sum
    }

    /// `ψ(D - k) f` on the frequency side for lattice point `idx`.
    pub fn project_spectrum(&self, spectrum: &Spectrum, idx: usize) -> Spectrum {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.spec.len()];
        for &(j, w) in &self.cells[idx] {
            coeffs[j] = spectrum.coeff_at(j) * w;
        }
        Spectrum::new(self.spec, coeffs).expect("lattice grid matches spectrum grid")
    }

    /// Stable hex digest of the lattice points and grid.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.spec.dim() as u64).to_le_bytes());
        h.update((self.spec.samples_per_axis() as u64).to_le_bytes());
        h.update(self.spec.extent().to_le_bytes());
        for k in &self.points {
            for v in k {
                h.update(v.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// `ψ(D - k) f`. Lattice points with no overlap give the zero field.
pub fn project(f: &Field, k: &[i64]) -> Result<Field> {
    let dim = f.spec().dim();
    if k.len() != dim {
        return Err(Error::Config(format!(
            "lattice point has {} components on a {dim}-dimensional grid",
            k.len()
        )));
    }
    let mut kk = [0i64; MAX_DIM];
    kk[..dim].copy_from_slice(k);
    let s = grid::forward_transform(f);
    let projected = s.multiply(|xi| {
        let eta = shifted(&xi[..dim], &kk);
        Complex64::new(bump_value(&eta[..dim]), 0.0)
    });
    Ok(grid::inverse_transform(&projected))
}

/// Every projection `ψ(D - k) f` in lattice order.
pub fn projections(f: &Field, lattice: &UnitLattice) -> Result<Vec<Field>> {
    check_lattice(f.spec(), lattice)?;
    let s = grid::forward_transform(f);
    Ok((0..lattice.len())
        .into_par_iter()
        .map(|idx| grid::inverse_transform(&lattice.project_spectrum(&s, idx)))
        .collect())
}

pub(crate) fn check_lattice(spec: &GridSpec, lattice: &UnitLattice) -> Result<()> {
    if lattice.spec() != spec {
        return Err(Error::Config(
            "unit lattice was built for a different grid".into(),
        ));
    }
    Ok(())
}

/// `(Σ_k |ψ(D - k) f(x)|²)^{1/2}` at every grid point, as a real field.
pub fn square_function(f: &Field) -> Field {
    let lattice = UnitLattice::new(*f.spec());
    square_function_with(f, &lattice)
}

pub(crate) fn square_function_with(f: &Field, lattice: &UnitLattice) -> Field {
    let spec = *f.spec();
    let s = grid::forward_transform(f);
    let pieces: Vec<Vec<f64>> = (0..lattice.len())
        .into_par_iter()
        .map(|idx| {
            if lattice.cell(idx).is_empty() {
                return Vec::new();
            }
            grid::inverse_transform(&lattice.project_spectrum(&s, idx))
                .values()
                .iter()
                .map(|v| v.norm_sqr())
                .collect()
        })
        .collect();
    let mut acc = vec![0.0; spec.len()];
    for piece in pieces.iter().filter(|p| !p.is_empty()) {
        for (a, v) in acc.iter_mut().zip(piece) {
            *a += v;
        }
    }
    Field::new(
        spec,
        acc.into_iter().map(|v| Complex64::new(v.sqrt(), 0.0)).collect(),
    )
    .expect("accumulator has grid length")
}

/// Square function of `S(t) f`.
pub fn square_function_evolved(f: &Field, flow: &FlowKind, t: f64) -> Result<Field> {
    let evolved = propagators::evolve(f, flow, t)?;
    Ok(square_function(&evolved))
}

/// `Σ_{|k| ≥ k_min} ∫ |ξ^α F g(ξ) ∂^β ψ(ξ - k)|² dξ` by grid quadrature, `|k|`
/// the Euclidean norm.
pub fn weighted_tail_sum(
    g: &Field,
    alpha: MultiIndex,
    beta: MultiIndex,
    k_min: f64,
) -> Result<f64> {
    let spec = *g.spec();
    let dim = spec.dim();
    let lattice = UnitLattice::new(spec);
    let s = grid::forward_transform(g);
    let mut total = 0.0;
    for (idx, k) in lattice.points().iter().enumerate() {
        let knorm = k[..dim].iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
        if knorm < k_min {
            continue;
        }
        for &(j, _) in lattice.cell(idx) {
            let xi = spec.frequency(j);
            let eta = shifted(&xi[..dim], k);
            let d = bump_derivative(&eta[..dim], beta)?;
            let weight = alpha.monomial(&xi) * d;
            total += (weight * s.coeff_at(j)).norm_sqr();
        }
    }
    Ok(total * spec.frequency_cell_volume())
}

/// `max_x |ψ(D - k) f(x)| / ‖ψ(D - k) f‖_{L²}`, or `None` for a zero projection.
pub fn bernstein_ratio(f: &Field, lattice: &UnitLattice, idx: usize) -> Result<Option<f64>> {
    check_lattice(f.spec(), lattice)?;
    let s = grid::forward_transform(f);
    let piece = grid::inverse_transform(&lattice.project_spectrum(&s, idx));
    let norm = grid::l2_norm(&piece);
    if norm == 0.0 {
        return Ok(None);
    }
    Ok(Some(piece.max_abs() / norm))
}

/// Discrete Cauchy–Schwarz constant `((2π)^{-n} · #cell · dξ^n)^{1/2}` bounding
/// [`bernstein_ratio`] for lattice point `idx`.
pub fn bernstein_constant(lattice: &UnitLattice, idx: usize) -> f64 {
    let spec = lattice.spec();
    let count = lattice.cell(idx).len() as f64;
    ((2.0 * PI).powi(-(spec.dim() as i32)) * count * spec.frequency_cell_volume()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::forward_transform;
    use approx::assert_relative_eq;

    #[test]
    fn support_and_symmetry() {
        assert_eq!(bump_value(&[1.0]), 0.0);
        assert_eq!(bump_value(&[0.6, 0.8]), 0.0);
        assert_eq!(bump_value(&[-1.5]), 0.0);
        assert!((bump_value(&[0.5]) - bump_value(&[-0.5])).abs() < 1e-15);
        assert!(bump_value(&[0.2, -0.3, 0.1]) > 0.0);
        assert_relative_eq!(bump_value(&[0.0]), 1.0);
    }

    #[test]
    fn partition_at_sample_points() {
        assert!((partition_sum(&[0.37]) - 1.0).abs() < 1e-12);
        assert!((partition_sum(&[0.37, 0.37]) - 1.0).abs() < 1e-12);
        assert!((partition_sum(&[0.37, 0.37, 0.37]) - 1.0).abs() < 1e-12);
        assert!((partition_sum(&[0.5, 0.5, 0.5]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let h = 1e-4;
        let points: [&[f64]; 4] = [&[0.31], &[-0.77], &[0.2, -0.45], &[0.1, 0.5, -0.3]];
        for xi in points {
            let dim = xi.len();
            for j in 0..dim {
                let mut b = [0u32; 3];
                b[j] = 1;
                let analytic = bump_derivative(xi, MultiIndex(b)).unwrap();
                let mut p = xi.to_vec();
                let mut m = xi.to_vec();
                p[j] += h;
                m[j] -= h;
                let fd = (bump_value(&p) - bump_value(&m)) / (2.0 * h);
                assert!((analytic - fd).abs() < 1e-6, "∂{j} at {xi:?}: {analytic} vs {fd}");

                for l in 0..dim {
                    let mut b2 = b;
                    b2[l] += 1;
                    let analytic = bump_derivative(xi, MultiIndex(b2)).unwrap();
                    let dj = |y: &[f64]| bump_derivative(y, MultiIndex(b)).unwrap();
                    let mut p = xi.to_vec();
                    let mut m = xi.to_vec();
                    p[l] += h;
                    m[l] -= h;
                    let fd = (dj(&p) - dj(&m)) / (2.0 * h);
                    assert!((analytic - fd).abs() < 1e-5, "∂{j}∂{l} at {xi:?}");
                }
            }
        }
        assert!(bump_derivative(&[0.1], MultiIndex::new(&[3])).is_err());
    }

    #[test]
    fn lattice_covers_every_frequency() {
        for spec in [
            GridSpec::new(1, 64, 20.0).unwrap(),
            GridSpec::new(2, 16, 6.0).unwrap(),
            GridSpec::new(3, 16, 8.0).unwrap(),
        ] {
            let lattice = UnitLattice::new(spec);
            for s in lattice.coverage() {
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pure_mode_splits_between_two_cells() {
        let spec = GridSpec::new(1, 128, 20.0 * PI).unwrap();
        let xi0 = 0.2;
        let m0 = (xi0 / spec.dxi()).round() as i64;
        assert!((m0 as f64 * spec.dxi() - xi0).abs() < 1e-12);
        let f = Field::from_fn(spec, |x| Complex64::from_polar(1.0, xi0 * x[0]));
        let p0 = project(&f, &[0]).unwrap();
        let p1 = project(&f, &[1]).unwrap();
        let sum = &p0 + &p1;
        assert!((&sum - &f).max_abs() < 1e-12);
        for k in [-2, -1, 2, 5] {
            assert!(project(&f, &[k]).unwrap().max_abs() < 1e-12);
        }
        assert_eq!(project(&f, &[1000]).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn integer_mode_square_function_is_flat() {
        let spec = GridSpec::new(1, 64, 2.0 * PI * 4.0).unwrap();
        let f = Field::from_fn(spec, |x| Complex64::from_polar(2.5, 3.0 * x[0]));
        let sf = square_function(&f);
        for v in sf.values() {
            assert!((v.re - 2.5).abs() < 1e-12);
        }
        assert_eq!(square_function(&Field::zeros(spec)).max_abs(), 0.0);
    }

    #[test]
    fn tail_sum_monotone_in_cutoff() {
        let spec = GridSpec::new(1, 256, 40.0).unwrap();
        let g = Field::from_real_fn(spec, |x| (-0.5 * x[0] * x[0]).exp());
        let z = MultiIndex::ZERO;
        let t2 = weighted_tail_sum(&g, z, z, 2.0).unwrap();
        let t3 = weighted_tail_sum(&g, z, z, 3.0).unwrap();
        assert!(t3.is_finite() && t3 <= t2 && t3 > 0.0);
        assert_eq!(weighted_tail_sum(&Field::zeros(spec), z, z, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn wrong_lattice_rejected() {
        let a = GridSpec::new(1, 32, 10.0).unwrap();
        let b = GridSpec::new(1, 64, 10.0).unwrap();
        let lattice = UnitLattice::new(b);
        assert!(projections(&Field::zeros(a), &lattice).is_err());
        let _ = forward_transform(&Field::zeros(a));
    }
}
