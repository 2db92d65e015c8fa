//! Free dispersive flows as diagonal Fourier multipliers.
//!
//! | kind            | symbol                       | grids     |
//! |-----------------|------------------------------|-----------|
//! | `kdv`           | `e^{itξ³}`                   | 1D        |
//! | `wave-plus`     | `e^{it|ξ|}`                  | dim ≥ 2   |
//! | `wave-minus`    | `e^{-it|ξ|}`                 | dim ≥ 2   |
//! | `wave-half`     | `cos(t|ξ|)`                  | dim ≥ 2   |
//! | `schrodinger:s` | `e^{it Σ ε_j ξ_j²}`          | any       |
//!
//! Evolution is exact on the grid: no time stepping is involved.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::grid::{self, Field, Spectrum, MAX_DIM};
use crate::{Complex64, Error, Result};

/// Signs `ε_j = ±1` of `Δ_± = Σ ε_j ∂²_j`, one per axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature(Vec<i8>);

impl Signature {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() || signs.len() > MAX_DIM {
            return Err(Error::Config(format!(
                "signature needs 1 to 3 signs (got {})",
                signs.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Config("signature entries must be +1 or -1".into()));
        }
        Ok(Self(signs))
    }

    /// All plus signs: the elliptic Laplacian.
    pub fn elliptic(dim: usize) -> Self {
        Self(vec![1; dim])
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_elliptic(&self) -> bool {
        self.0.iter().all(|&s| s == self.0[0])
    }

    /// `Σ ε_j ξ_j²`.
    pub fn quadratic_form(&self, xi: &[f64; MAX_DIM]) -> f64 {
        self.0
            .iter()
            .zip(xi)
            .map(|(&s, &x)| s as f64 * x * x)
            .sum()
    }
}

impl FromStr for Signature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let signs = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::Config(format!("bad signature character `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(signs)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Which free flow to apply.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FlowKind {
    Kdv,
    WaveHalfSum,
    WavePlus,
    WaveMinus,
    Schrodinger(Signature),
}

impl FlowKind {
    /// Checks that the flow is defined on a grid of this dimension.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        let ok = match self {
            FlowKind::Kdv => dim == 1,
            FlowKind::WaveHalfSum | FlowKind::WavePlus | FlowKind::WaveMinus => dim >= 2,
            FlowKind::Schrodinger(sig) => sig.dim() == dim,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "flow `{self}` is not defined on a {dim}-dimensional grid"
            )))
        }
    }

    /// Whether the multiplier has unit modulus.
    pub fn is_unitary(&self) -> bool {
        !matches!(self, FlowKind::WaveHalfSum)
    }

    /// The multiplier of `S(t)` at frequency `ξ`.
    pub fn symbol(&self, xi: &[f64; MAX_DIM], t: f64) -> Complex64 {
        match self {
            FlowKind::Kdv => Complex64::from_polar(1.0, t * xi[0].powi(3)),
            FlowKind::WavePlus => Complex64::from_polar(1.0, t * radius(xi)),
            FlowKind::WaveMinus => Complex64::from_polar(1.0, -t * radius(xi)),
            FlowKind::WaveHalfSum => Complex64::new((t * radius(xi)).cos(), 0.0),
            FlowKind::Schrodinger(sig) => Complex64::from_polar(1.0, t * sig.quadratic_form(xi)),
        }
    }

    /// First-order bound on `|symbol - 1|`: `|tξ³|`, `|t||ξ|` or `|t||ξ|²`.
    pub fn small_time_bound(&self, xi: &[f64; MAX_DIM], t: f64) -> f64 {
        match self {
            FlowKind::Kdv => (t * xi[0].powi(3)).abs(),
            FlowKind::WavePlus | FlowKind::WaveMinus | FlowKind::WaveHalfSum => {
                t.abs() * radius(xi)
            }
            FlowKind::Schrodinger(_) => t.abs() * radius(xi).powi(2),
        }
    }

    /// Largest group speed `|∇φ(ξ)|` of the phase at `ξ`.
    pub fn group_speed(&self, xi: &[f64; MAX_DIM]) -> f64 {
        match self {
            FlowKind::Kdv => 3.0 * xi[0] * xi[0],
            FlowKind::WavePlus | FlowKind::WaveMinus | FlowKind::WaveHalfSum => 1.0,
            FlowKind::Schrodinger(_) => 2.0 * radius(xi),
        }
    }
}

fn radius(xi: &[f64; MAX_DIM]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowKind::Kdv => f.write_str("kdv"),
            FlowKind::WaveHalfSum => f.write_str("wave-half"),
            FlowKind::WavePlus => f.write_str("wave-plus"),
            FlowKind::WaveMinus => f.write_str("wave-minus"),
            FlowKind::Schrodinger(sig) => write!(f, "schrodinger:{sig}"),
        }
    }
}

impl FromStr for FlowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kdv" => Ok(FlowKind::Kdv),
            "wave-half" => Ok(FlowKind::WaveHalfSum),
            "wave-plus" => Ok(FlowKind::WavePlus),
            "wave-minus" => Ok(FlowKind::WaveMinus),
            other => match other.strip_prefix("schrodinger:") {
                Some(sig) => Ok(FlowKind::Schrodinger(sig.parse()?)),
                None => Err(Error::Config(format!("unknown flow `{other}`"))),
            },
        }
    }
}

impl TryFrom<String> for FlowKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FlowKind> for String {
    fn from(k: FlowKind) -> String {
        k.to_string()
    }
}

/// `S(t) f` on the frequency side.
pub fn evolve_spectrum(s: &Spectrum, kind: &FlowKind, t: f64) -> Result<Spectrum> {
    kind.check_dim(s.spec().dim())?;
    if t == 0.0 {
        return Ok(s.clone());
    }
    Ok(s.multiply(|xi| kind.symbol(xi, t)))
}

/// `S(t) f`.
pub fn evolve(f: &Field, kind: &FlowKind, t: f64) -> Result<Field> {
    kind.check_dim(f.spec().dim())?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let s = grid::forward_transform(f);
    Ok(grid::inverse_transform(&evolve_spectrum(&s, kind, t)?))
}

/// Weight family for [`fractional_multiplier`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MultiplierKind {
    /// `|ξ|^a`
    Space,
    /// `|ξ|^{3a}`
    TimeKdv,
    /// `|ξ|^a`
    TimeWave,
    /// `|Σ ε_j ξ_j²|^{2a}`
    TimeSchrodinger(Signature),
}

impl MultiplierKind {
    fn base(&self, xi: &[f64; MAX_DIM]) -> (f64, f64) {
        match self {
            MultiplierKind::Space | MultiplierKind::TimeWave => (radius(xi), 1.0),
            MultiplierKind::TimeKdv => (radius(xi), 3.0),
            MultiplierKind::TimeSchrodinger(sig) => (sig.quadratic_form(xi).abs(), 2.0),
        }
    }
}

/// Coefficientwise multiplication by the fractional weight of `kind` with
/// exponent `a`. Negative exponents require the data to vanish wherever the
/// base of the weight does.
pub fn fractional_multiplier(f: &Field, a: f64, kind: &MultiplierKind) -> Result<Field> {
    if let MultiplierKind::TimeSchrodinger(sig) = kind {
        if sig.dim() != f.spec().dim() {
            return Err(Error::Config("signature length differs from grid dimension".into()));
        }
    }
    if a == 0.0 {
        return Ok(f.clone());
    }
    let s = grid::forward_transform(f);
    let spec = *s.spec();
    let scale = s.max_abs().max(f64::MIN_POSITIVE);
    let mut coeffs = Vec::with_capacity(spec.len());
    for (j, &c) in s.coeffs().iter().enumerate() {
        let (base, power) = kind.base(&spec.frequency(j));
        if base == 0.0 {
            if a < 0.0 && c.norm() > 1e-14 * scale {
                return Err(Error::Singularity(format!(
                    "exponent {a} with nonzero coefficient at a zero of the weight"
                )));
            }
            coeffs.push(Complex64::new(0.0, 0.0));
        } else {
            coeffs.push(c * base.powf(power * a));
        }
    }
    Ok(grid::inverse_transform(&Spectrum::new(spec, coeffs)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{forward_transform, GridSpec};
    use approx::assert_relative_eq;

    fn mode(spec: GridSpec, m: &[i64]) -> (Field, [f64; MAX_DIM]) {
        let dxi = spec.dxi();
        let mut xi = [0.0; MAX_DIM];
        for (a, &v) in m.iter().enumerate() {
            xi[a] = v as f64 * dxi;
        }
        let f = Field::from_fn(spec, |x| {
            let phase: f64 = (0..spec.dim()).map(|a| x[a] * xi[a]).sum();
            Complex64::from_polar(1.0, phase)
        });
        (f, xi)
    }

    #[test]
    fn parses_flow_names() {
        for name in ["kdv", "wave-half", "wave-plus", "wave-minus", "schrodinger:+-", "schrodinger:+++"] {
            let k: FlowKind = name.parse().unwrap();
            assert_eq!(k.to_string(), name);
        }
        assert!("schrodinger:+x".parse::<FlowKind>().is_err());
        assert!("heat".parse::<FlowKind>().is_err());
        let json = serde_json::to_string(&FlowKind::WaveHalfSum).unwrap();
        assert_eq!(json, "\"wave-half\"");
    }

    #[test]
    fn dimension_rules() {
        let s1 = GridSpec::new(1, 16, 4.0).unwrap();
        let s2 = GridSpec::new(2, 16, 4.0).unwrap();
        assert!(evolve(&Field::zeros(s2), &FlowKind::Kdv, 0.1).is_err());
        assert!(evolve(&Field::zeros(s1), &FlowKind::WaveHalfSum, 0.1).is_err());
        let sig: Signature = "+-".parse().unwrap();
        assert!(evolve(&Field::zeros(s1), &FlowKind::Schrodinger(sig.clone()), 0.1).is_err());
        assert!(evolve(&Field::zeros(s2), &FlowKind::Schrodinger(sig), 0.1).is_ok());
    }

    #[test]
    fn kdv_mode_picks_up_cubic_phase() {
        let spec = GridSpec::new(1, 64, 12.0).unwrap();
        let (f, xi) = mode(spec, &[3]);
        let t = 0.7;
        let u = evolve(&f, &FlowKind::Kdv, t).unwrap();
        let shift = Complex64::from_polar(1.0, t * xi[0].powi(3));
        for j in 0..spec.len() {
            assert!((u.value_at(j) - f.value_at(j) * shift).norm() < 1e-12);
        }
    }

    #[test]
    fn wave_half_scales_by_cosine() {
        let spec = GridSpec::new(2, 16, 6.0).unwrap();
        let (f, xi) = mode(spec, &[2, -1]);
        let t = 1.3;
        let u = evolve(&f, &FlowKind::WaveHalfSum, t).unwrap();
        let c = (t * radius(&xi)).cos();
        assert!((&u - &f.scale(Complex64::new(c, 0.0))).max_abs() < 1e-12);

        let dc = Field::from_real_fn(spec, |_| 2.0);
        let u = evolve(&dc, &FlowKind::WaveHalfSum, t).unwrap();
        assert!((&u - &dc).max_abs() < 1e-12);
    }

    #[test]
    fn fractional_weights() {
        let spec = GridSpec::new(1, 64, 12.0).unwrap();
        let (f, xi) = mode(spec, &[4]);
        let same = fractional_multiplier(&f, 0.0, &MultiplierKind::Space).unwrap();
        assert_eq!(same, f);
        let u = fractional_multiplier(&f, 1.0, &MultiplierKind::Space).unwrap();
        assert!((&u - &f.scale(Complex64::new(xi[0].abs(), 0.0))).max_abs() < 1e-12);
        let u = fractional_multiplier(&f, 1.0 / 3.0, &MultiplierKind::TimeKdv).unwrap();
        assert!((&u - &f.scale(Complex64::new(xi[0].abs(), 0.0))).max_abs() < 1e-11);

        let spec2 = GridSpec::new(2, 16, 6.0).unwrap();
        let (g, xi2) = mode(spec2, &[2, 1]);
        let sig: Signature = "+-".parse().unwrap();
        let u = fractional_multiplier(&g, 0.5, &MultiplierKind::TimeSchrodinger(sig.clone())).unwrap();
        let w = sig.quadratic_form(&xi2).abs();
        assert!((&u - &g.scale(Complex64::new(w, 0.0))).max_abs() < 1e-11);
    }

    #[test]
    fn negative_exponent_needs_zero_mean() {
        let spec = GridSpec::new(1, 32, 8.0).unwrap();
        let constant = Field::from_real_fn(spec, |_| 1.0);
        assert!(matches!(
            fractional_multiplier(&constant, -0.5, &MultiplierKind::Space),
            Err(Error::Singularity(_))
        ));
        let (f, xi) = mode(spec, &[2]);
        let u = fractional_multiplier(&f, -1.0, &MultiplierKind::Space).unwrap();
        assert!((&u - &f.scale(Complex64::new(1.0 / xi[0], 0.0))).max_abs() < 1e-12);
    }

    #[test]
    fn unitary_flows_preserve_norm() {
        let spec = GridSpec::new(2, 32, 10.0).unwrap();
        let f = Field::from_fn(spec, |x| {
            Complex64::new((-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp(), x[0] * (-x[1] * x[1]).exp() * 0.1)
        });
        let base = grid::l2_norm(&f);
        for kind in [
            FlowKind::WavePlus,
            FlowKind::WaveMinus,
            FlowKind::Schrodinger("+-".parse().unwrap()),
        ] {
            let u = evolve(&f, &kind, 0.9).unwrap();
            assert_relative_eq!(grid::l2_norm(&u), base, max_relative = 1e-10);
        }
        let half = evolve(&f, &FlowKind::WaveHalfSum, 0.9).unwrap();
        assert!(grid::l2_norm(&half) <= base * (1.0 + 1e-12));
        let _ = forward_transform(&half);
    }
}
