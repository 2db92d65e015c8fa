//! Periodic sampling grids and the unitary discrete Fourier pair.
//!
//! A [`GridSpec`] describes the box `[-L/2, L/2)^dim` sampled by `N` points per
//! axis. Physical samples live in a [`Field`], frequency coefficients in a
//! [`Spectrum`]. Both are stored row-major with axis 0 varying slowest.
//!
//! Transforms approximate the continuum transform
//! `F f(ξ) = (2π)^{-n/2} ∫ e^{-ix·ξ} f(x) dx` with the quadrature weights
//! `dx = L/N` and `dξ = 2π/L`, so that [`l2_norm`] on either side approximates
//! the continuum `L²` norm and Plancherel holds exactly on the grid.

mod fft;
pub mod io;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Complex64, Error, Result};

/// Maximum supported dimension.
pub const MAX_DIM: usize = 3;

/// Uniform periodic grid on `[-L/2, L/2)^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    samples_per_axis: usize,
    extent: f64,
}

impl GridSpec {
    pub fn new(dim: usize, samples_per_axis: usize, extent: f64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::Grid(format!("dim must be 1, 2 or 3 (got {dim})")));
        }
        if samples_per_axis < 16 || !samples_per_axis.is_power_of_two() {
            return Err(Error::Grid(format!(
                "samples_per_axis must be a power of two >= 16 (got {samples_per_axis})"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::Grid(format!("extent must be positive (got {extent})")));
        }
        Ok(Self {
            dim,
            samples_per_axis,
            extent,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples_per_axis
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Total number of grid points, `N^dim`.
    pub fn len(&self) -> usize {
        self.samples_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spatial step `L/N`.
    pub fn dx(&self) -> f64 {
        self.extent / self.samples_per_axis as f64
    }

    /// Frequency step `2π/L`.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.extent
    }

    /// Physical quadrature weight `dx^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Frequency quadrature weight `dξ^dim`.
    pub fn frequency_cell_volume(&self) -> f64 {
        self.dxi().powi(self.dim as i32)
    }

    /// Measure of the periodic box, `L^dim`.
    pub fn volume(&self) -> f64 {
        self.extent.powi(self.dim as i32)
    }

    /// Per-axis index of a flat (row-major) index. Unused axes are zero.
    pub fn axis_indices(&self, flat: usize) -> [usize; MAX_DIM] {
        let n = self.samples_per_axis;
        let mut out = [0; MAX_DIM];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rest % n;
            rest /= n;
        }
        out
    }

    /// Flat index of a per-axis index.
    pub fn flat_index(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.dim {
            return Err(Error::Grid(format!(
                "point index has {} components on a {}-dimensional grid",
                idx.len(),
                self.dim
            )));
        }
        let n = self.samples_per_axis;
        let mut flat = 0;
        for &i in idx {
            if i >= n {
                return Err(Error::Grid(format!("point index {i} out of range 0..{n}")));
            }
            flat = flat * n + i;
        }
        Ok(flat)
    }

    /// Flat index of the grid point at the origin `x = 0`.
    pub fn origin(&self) -> usize {
        let half = [self.samples_per_axis / 2; MAX_DIM];
        self.flat_index(&half[..self.dim]).expect("origin is on the grid")
    }

    /// Physical coordinates `x_j = -L/2 + j·dx` of a flat index.
    pub fn coords(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.axis_indices(flat);
        let dx = self.dx();
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = -0.5 * self.extent + idx[axis] as f64 * dx;
        }
        x
    }

    /// Integer lattice index `m ∈ {-N/2, …, N/2-1}` per axis of a flat
    /// spectrum index.
    pub fn mode_indices(&self, flat: usize) -> [i64; MAX_DIM] {
        let idx = self.axis_indices(flat);
        let half = (self.samples_per_axis / 2) as i64;
        let mut m = [0; MAX_DIM];
        for axis in 0..self.dim {
            m[axis] = idx[axis] as i64 - half;
        }
        m
    }

    /// Frequency `ξ = (2π/L)·m` of a flat spectrum index.
    pub fn frequency(&self, flat: usize) -> [f64; MAX_DIM] {
        let m = self.mode_indices(flat);
        let dxi = self.dxi();
        let mut xi = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            xi[axis] = m[axis] as f64 * dxi;
        }
        xi
    }

    /// Flat spectrum index of a lattice mode `m`, if it lies in the frequency box.
    pub fn mode_flat_index(&self, m: &[i64]) -> Option<usize> {
        if m.len() != self.dim {
            return None;
        }
        let half = (self.samples_per_axis / 2) as i64;
        let mut idx = [0usize; MAX_DIM];
        for (axis, &mi) in m.iter().enumerate() {
            if mi < -half || mi >= half {
                return None;
            }
            idx[axis] = (mi + half) as usize;
        }
        self.flat_index(&idx[..self.dim]).ok()
    }

    /// Per-axis closed frequency range `[-N/2·dξ, (N/2-1)·dξ]`.
    pub fn frequency_box(&self) -> (f64, f64) {
        let half = (self.samples_per_axis / 2) as f64;
        let dxi = self.dxi();
        (-half * dxi, (half - 1.0) * dxi)
    }
}

/// Multi-index `(a_1, …, a_dim)` for monomials `x^a` and derivatives `∂^a`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub [u32; MAX_DIM]);

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex([0; MAX_DIM]);

    pub fn new(components: &[u32]) -> Self {
        let mut a = [0; MAX_DIM];
        a[..components.len()].copy_from_slice(components);
        MultiIndex(a)
    }

    /// Order `|a| = Σ a_j`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `y^a = Π y_j^{a_j}` for a real point.
    pub fn monomial(&self, y: &[f64; MAX_DIM]) -> f64 {
        self.0
            .iter()
            .zip(y)
            .map(|(&a, &v)| v.powi(a as i32))
            .product()
    }

    /// `(iξ)^a`, the symbol of `∂^a`.
    pub fn derivative_symbol(&self, xi: &[f64; MAX_DIM]) -> Complex64 {
        let order = self.order();
        let i_pow = match order % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        i_pow * self.monomial(xi)
    }
}

/// Complex samples of a function on the grid points (physical space).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    spec: GridSpec,
    values: Vec<Complex64>,
}

/// Complex coefficients on the frequency lattice. Flat index `i` along each
/// axis corresponds to lattice mode `m = i - N/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    spec: GridSpec,
    coeffs: Vec<Complex64>,
}

macro_rules! grid_data_common {
    ($ty:ident, $data:ident) => {
        impl $ty {
            pub fn new(spec: GridSpec, $data: Vec<Complex64>) -> Result<Self> {
                if $data.len() != spec.len() {
                    return Err(Error::Shape {
                        expected: spec.len(),
                        got: $data.len(),
                    });
                }
                Ok(Self { spec, $data })
            }

            pub fn zeros(spec: GridSpec) -> Self {
                Self {
                    spec,
                    $data: vec![Complex64::new(0.0, 0.0); spec.len()],
                }
            }

            pub fn spec(&self) -> &GridSpec {
                &self.spec
            }

            pub fn $data(&self) -> &[Complex64] {
                &self.$data
            }

            pub fn into_inner(self) -> Vec<Complex64> {
                self.$data
            }

            pub fn scale(&self, factor: Complex64) -> Self {
                Self {
                    spec: self.spec,
                    $data: self.$data.iter().map(|v| v * factor).collect(),
                }
            }

            /// Pointwise combination of two objects on the same grid.
            pub fn zip_with(
                &self,
                other: &Self,
                op: impl Fn(Complex64, Complex64) -> Complex64,
            ) -> Result<Self> {
                if self.spec != other.spec {
                    return Err(Error::Config("operands live on different grids".into()));
                }
                Ok(Self {
                    spec: self.spec,
                    $data: self
                        .$data
                        .iter()
                        .zip(&other.$data)
                        .map(|(&a, &b)| op(a, b))
                        .collect(),
                })
            }

            /// Largest pointwise modulus.
            pub fn max_abs(&self) -> f64 {
                self.$data.iter().map(|v| v.norm()).fold(0.0, f64::max)
            }
        }

        impl std::ops::Add for &$ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                self.zip_with(rhs, |a, b| a + b)
                    .expect("addition of grid data on different grids")
            }
        }

        impl std::ops::Sub for &$ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                self.zip_with(rhs, |a, b| a - b)
                    .expect("subtraction of grid data on different grids")
            }
        }
    };
}

grid_data_common!(Field, values);
grid_data_common!(Spectrum, coeffs);

impl Field {
    /// Samples `f(x_j)` at every grid point.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64; MAX_DIM]) -> Complex64) -> Self {
        let values = (0..spec.len()).map(|j| f(&spec.coords(j))).collect();
        Self { spec, values }
    }

    /// Samples a real function.
    pub fn from_real_fn(spec: GridSpec, f: impl Fn(&[f64; MAX_DIM]) -> f64) -> Self {
        Self::from_fn(spec, |x| Complex64::new(f(x), 0.0))
    }

    pub fn value_at(&self, flat: usize) -> Complex64 {
        self.values[flat]
    }
}

impl Spectrum {
    /// Evaluates a coefficient rule at every lattice frequency.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64; MAX_DIM]) -> Complex64) -> Self {
        let coeffs = (0..spec.len()).map(|j| f(&spec.frequency(j))).collect();
        Self { spec, coeffs }
    }

    /// Coefficientwise multiplication by a frequency weight `w(ξ)`.
    pub fn multiply(&self, weight: impl Fn(&[f64; MAX_DIM]) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * weight(&self.spec.frequency(j)))
            .collect();
        Self {
            spec: self.spec,
            coeffs,
        }
    }

    pub fn coeff_at(&self, flat: usize) -> Complex64 {
        self.coeffs[flat]
    }

    /// Discrete `L²` norm on the frequency side, `(Σ |F(ξ)|² dξ^n)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        weighted_norm(&self.coeffs, self.spec.frequency_cell_volume())
    }
}

fn weighted_norm(values: &[Complex64], weight: f64) -> f64 {
    (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * weight).sqrt()
}

/// `(2π)^{-n/2}` prefactor of the transform pair.
fn transform_prefactor(dim: usize) -> f64 {
    (2.0 * PI).powf(-0.5 * dim as f64)
}

/// Sign `(-1)^{Σ m_a}` relating the spatial offset `-L/2` to the raw DFT.
fn offset_sign(spec: &GridSpec, flat: usize) -> f64 {
    let parity: i64 = spec.mode_indices(flat).iter().sum();
    if parity.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Row-major permutation between raw DFT order (`q = m mod N`) and the
/// centered storage order (`i = m + N/2`). Shifting by `N/2` is an involution.
fn half_shift(spec: &GridSpec, data: &[Complex64]) -> Vec<Complex64> {
    let n = spec.samples_per_axis();
    let half = n / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for (flat, slot) in out.iter_mut().enumerate() {
        let idx = spec.axis_indices(flat);
        let mut src = 0;
        for &i in &idx[..spec.dim()] {
            src = src * n + (i + half) % n;
        }
        *slot = data[src];
    }
    out
}

/// Forward transform: physical samples to lattice coefficients.
pub fn forward_transform(f: &Field) -> Spectrum {
    let spec = f.spec;
    let mut buf = f.values.clone();
    fft::transform_nd(&mut buf, spec.samples_per_axis(), spec.dim(), false);
    let mut coeffs = half_shift(&spec, &buf);
    let scale = transform_prefactor(spec.dim()) * spec.cell_volume();
    for (flat, c) in coeffs.iter_mut().enumerate() {
        *c *= scale * offset_sign(&spec, flat);
    }
    Spectrum { spec, coeffs }
}

/// Inverse transform: lattice coefficients to physical samples.
pub fn inverse_transform(s: &Spectrum) -> Field {
    let spec = s.spec;
    let mut signed = s.coeffs.clone();
    for (flat, c) in signed.iter_mut().enumerate() {
        *c *= offset_sign(&spec, flat);
    }
    let mut buf = half_shift(&spec, &signed);
    fft::transform_nd(&mut buf, spec.samples_per_axis(), spec.dim(), true);
    let scale = transform_prefactor(spec.dim()) * spec.frequency_cell_volume();
    for v in buf.iter_mut() {
        *v *= scale;
    }
    Field { spec, values: buf }
}

/// Discrete `L²` norm `(Σ |f(x_j)|² dx^n)^{1/2}`.
pub fn l2_norm(f: &Field) -> f64 {
    weighted_norm(&f.values, f.spec.cell_volume())
}

/// Sobolev norm `(Σ (1+|ξ|²)^s |F f(ξ)|² dξ^n)^{1/2}`.
pub fn sobolev_norm(f: &Field, s: f64) -> f64 {
    spectrum_sobolev_norm(&forward_transform(f), s)
}

/// [`sobolev_norm`] for data already on the frequency side.
pub fn spectrum_sobolev_norm(spectrum: &Spectrum, s: f64) -> f64 {
    let spec = spectrum.spec;
    let sum: f64 = spectrum
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let xi = spec.frequency(j);
            let r2: f64 = xi.iter().map(|v| v * v).sum();
            (1.0 + r2).powf(s) * c.norm_sqr()
        })
        .sum();
    (sum * spec.frequency_cell_volume()).sqrt()
}
