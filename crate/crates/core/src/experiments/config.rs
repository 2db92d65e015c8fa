//! Run configuration: a TOML document validated before any computation.
//!
//! ```toml
//! seed = "0x2a"               # decimal integer or 0x-hex string
//! data = "gaussian"           # gaussian | mode:ξ₁[,ξ₂,…] | indicator:R | file:path
//! flows = ["kdv"]             # kdv | wave-half | wave-plus | wave-minus | schrodinger:+-…
//! times = [0.1, 0.05, 0.02]
//! alphas = [0.01, 0.02]       # optional; calibrated from a pilot when absent
//! epsilons = [0.4, 0.2, 0.1]
//! ensemble_size = 2000
//! pilot_size = 2000
//! trials = 20
//! output_dir = "results"
//! threads = 4                 # optional
//! observation_points = [[128]] # optional axis indices; default origin + 4 random points
//! indices = [[[0], [0]], [[1], [1]]]  # optional (α, β) pairs for the density event
//!
//! [grid]
//! dim = 1
//! samples_per_axis = 256
//! extent = 40.0
//!
//! [khintchine]
//! p = [2, 4, 8, 16]
//! vectors = 20
//! length = 32
//! samples = 10000
//! ```

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::grid::{self, io::GridData, Field, GridSpec, MultiIndex, MAX_DIM};
use crate::propagators::FlowKind;
use crate::randomize::parse_seed;
use crate::tailprob::MIN_ENSEMBLE;
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub samples_per_axis: usize,
    pub extent: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 1, samples_per_axis: 256, extent: 40.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KhintchineConfig {
    pub p: Vec<f64>,
    pub vectors: usize,
    pub length: usize,
    pub samples: usize,
}

impl Default for KhintchineConfig {
    fn default() -> Self {
        Self {
            p: vec![2.0, 4.0, 8.0, 16.0],
            vectors: 20,
            length: 32,
            samples: 10_000,
        }
    }
}

/// A seed written either as an integer or as a decimal/hex string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedValue {
    Int(u64),
    Text(String),
}

impl SeedValue {
    pub fn value(&self) -> Result<u64> {
        match self {
            SeedValue::Int(v) => Ok(*v),
            SeedValue::Text(s) => parse_seed(s),
        }
    }
}

/// An index pair `(α, β)` written as two per-axis lists.
pub type IndexPair = (Vec<u32>, Vec<u32>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_data")]
    pub data: String,
    #[serde(default = "default_flows")]
    pub flows: Vec<String>,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    #[serde(default = "default_ensemble")]
    pub pilot_size: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: SeedValue,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub observation_points: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub indices: Option<Vec<IndexPair>>,
    #[serde(default)]
    pub khintchine: KhintchineConfig,
}

fn default_data() -> String {
    "gaussian".into()
}
fn default_flows() -> Vec<String> {
    vec!["kdv".into()]
}
fn default_times() -> Vec<f64> {
    vec![0.1, 0.05, 0.02]
}
fn default_epsilons() -> Vec<f64> {
    vec![0.4, 0.2, 0.1]
}
fn default_ensemble() -> usize {
    2000
}
fn default_trials() -> usize {
    20
}
fn default_seed() -> SeedValue {
    SeedValue::Int(1)
}
fn default_output() -> PathBuf {
    PathBuf::from("results")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            data: default_data(),
            flows: default_flows(),
            times: default_times(),
            alphas: None,
            epsilons: default_epsilons(),
            ensemble_size: default_ensemble(),
            pilot_size: default_ensemble(),
            trials: default_trials(),
            seed: default_seed(),
            output_dir: default_output(),
            threads: None,
            observation_points: None,
            indices: None,
            khintchine: KhintchineConfig::default(),
        }
    }
}

/// Initial data recipes.
#[derive(Debug, Clone, PartialEq)]
pub enum DataProfile {
    Gaussian,
    Mode(Vec<f64>),
    Indicator(f64),
    File(PathBuf),
}

impl DataProfile {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Config(format!("data: `{s}` {why}"));
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        match (name, arg) {
            ("gaussian", None) => Ok(Self::Gaussian),
            ("mode", Some(a)) => a
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad("has a non-numeric frequency")))
                .collect::<Result<Vec<_>>>()
                .map(Self::Mode),
            ("indicator", Some(a)) => match a.parse::<f64>() {
                Ok(r) if r > 0.0 => Ok(Self::Indicator(r)),
                _ => Err(bad("needs a positive radius")),
            },
            ("file", Some(a)) if !a.is_empty() => Ok(Self::File(PathBuf::from(a))),
            _ => Err(bad(
                "is not one of gaussian, mode:ξ[,…], indicator:R, file:path",
            )),
        }
    }

    /// Samples the profile on a grid. Mode frequencies snap to the nearest grid
    /// frequency; relative paths resolve against `base`.
    pub fn build(&self, spec: GridSpec, base: &Path) -> Result<Field> {
        let dim = spec.dim();
        match self {
            Self::Gaussian => Ok(Field::from_real_fn(spec, |x| {
                (-0.5 * x[..dim].iter().map(|v| v * v).sum::<f64>()).exp()
            })),
            Self::Mode(xi) => {
                if xi.len() != dim {
                    return Err(Error::Config(format!(
                        "data: mode has {} components on a {dim}-dimensional grid",
                        xi.len()
                    )));
                }
                let mut w = [0.0; MAX_DIM];
                for (a, v) in xi.iter().enumerate() {
                    w[a] = (v / spec.dxi()).round() * spec.dxi();
                }
                Ok(Field::from_fn(spec, |x| {
                    Complex64::from_polar(1.0, w.iter().zip(x).map(|(a, b)| a * b).sum())
                }))
            }
            Self::Indicator(r) => Ok(Field::from_real_fn(spec, |x| {
                let d = x[..dim].iter().map(|v| v * v).sum::<f64>().sqrt();
                if (d - r).abs() <= 1e-12 * r {
                    0.5
                } else if d < *r {
                    1.0
                } else {
                    0.0
                }
            })),
            Self::File(path) => {
                let full = if path.is_relative() { base.join(path) } else { path.clone() };
                let data = grid::io::read_path(&full)?;
                if data.spec() != &spec {
                    return Err(Error::Config(format!(
                        "data: file {} holds a {:?} grid, the configuration asks for {spec:?}",
                        full.display(),
                        data.spec()
                    )));
                }
                Ok(match data {
                    GridData::Physical(f) => f,
                    GridData::Spectral(s) => grid::inverse_transform(&s),
                })
            }
        }
    }
}

/// A configuration that passed validation, with every string parsed.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub raw: RunConfig,
    pub spec: GridSpec,
    pub data: Field,
    pub flows: Vec<FlowKind>,
    pub seed: u64,
    /// Flat indices.
    pub observation_points: Vec<usize>,
    pub indices: Vec<(MultiIndex, MultiIndex)>,
    /// sha256 of the configuration, excluding output location and thread count.
    pub hash: String,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string() + &span_hint(text, e.span())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Stable hash of everything that influences result bodies.
    pub fn hash(&self) -> String {
        let mut key = self.clone();
        key.output_dir = PathBuf::new();
        key.threads = None;
        let json = serde_json::to_string(&key).expect("configuration serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Checks every field and resolves the data; `base` anchors relative paths.
    pub fn validate(&self, base: &Path) -> Result<ValidatedConfig> {
        let field = |name: &str, msg: String| Error::Config(format!("{name}: {msg}"));
        let g = &self.grid;
        let spec = GridSpec::new(g.dim, g.samples_per_axis, g.extent).map_err(|e| field("grid", e.to_string()))?;
        if self.flows.is_empty() {
            return Err(field("flows", "at least one flow is required".into()));
        }
        let flows = self
            .flows
            .iter()
            .map(|s| {
                let k: FlowKind = s.parse().map_err(|e: Error| field("flows", e.to_string()))?;
                k.check_dim(g.dim).map_err(|e| field("flows", e.to_string()))?;
                Ok(k)
            })
            .collect::<Result<Vec<_>>>()?;
        if self.times.is_empty() || self.times.iter().any(|t| !t.is_finite()) {
            return Err(field("times", "must be a non-empty list of finite numbers".into()));
        }
        if let Some(a) = &self.alphas {
            if a.is_empty() || a.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(field("alphas", "must be a non-empty list of nonnegative numbers".into()));
            }
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(field("epsilons", "must be a non-empty list of positive numbers".into()));
        }
        if self.ensemble_size < MIN_ENSEMBLE {
            return Err(field("ensemble_size", format!("must be at least {MIN_ENSEMBLE} (got {})", self.ensemble_size)));
        }
        if self.pilot_size < MIN_ENSEMBLE {
            return Err(field("pilot_size", format!("must be at least {MIN_ENSEMBLE} (got {})", self.pilot_size)));
        }
        if self.trials == 0 {
            return Err(field("trials", "must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(field("threads", "must be positive".into()));
        }
        let kh = &self.khintchine;
        if kh.p.is_empty() || kh.p.iter().any(|p| !(*p >= 2.0)) {
            return Err(field("khintchine.p", "every exponent must be at least 2".into()));
        }
        if kh.samples < 1000 || kh.vectors == 0 || kh.length == 0 {
            return Err(field("khintchine", "needs samples >= 1000 and positive vectors and length".into()));
        }
        let seed = self.seed.value().map_err(|e| field("seed", e.to_string()))?;
        let profile = DataProfile::parse(&self.data)?;
        let data = profile.build(spec, base)?;

        let observation_points = match &self.observation_points {
            Some(points) => {
                if points.is_empty() {
                    return Err(field("observation_points", "must not be empty".into()));
                }
                points
                    .iter()
                    .map(|p| {
                        if p.len() != g.dim {
                            return Err(field("observation_points", format!("point {p:?} needs {} indices", g.dim)));
                        }
                        spec.flat_index(p).map_err(|e| field("observation_points", e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            None => default_points(spec, seed),
        };
        let indices = match &self.indices {
            Some(pairs) => pairs
                .iter()
                .map(|(a, b)| {
                    if a.len() != g.dim || b.len() != g.dim {
                        return Err(field("indices", format!("pair ({a:?}, {b:?}) needs {} entries per index", g.dim)));
                    }
                    let (a, b) = (MultiIndex::new(a), MultiIndex::new(b));
                    if b.order() > 2 {
                        return Err(field("indices", "derivative order above 2 is not supported".into()));
                    }
                    Ok((a, b))
                })
                .collect::<Result<Vec<_>>>()?,
            None => default_indices(g.dim),
        };
        Ok(ValidatedConfig {
            raw: self.clone(),
            spec,
            data,
            flows,
            seed,
            observation_points,
            indices,
            hash: self.hash(),
        })
    }
}

fn span_hint(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => {
            let line = text[..r.start.min(text.len())].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        None => String::new(),
    }
}

/// The origin plus four grid points drawn from the seed.
pub fn default_points(spec: GridSpec, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6f62_7365_7276_6521);
    let mut points = vec![spec.origin()];
    while points.len() < 5 {
        let p = rng.random_range(0..spec.len());
        if !points.contains(&p) {
            points.push(p);
        }
    }
    points
}

/// Every pair with `α_j, β_j ∈ {0, 1}` per axis.
pub fn default_indices(dim: usize) -> Vec<(MultiIndex, MultiIndex)> {
    let unit: Vec<MultiIndex> = crate::decompose::multi_indices(dim, dim as u32)
        .into_iter()
        .filter(|m| m.0.iter().all(|v| *v <= 1))
        .collect();
    unit.iter()
        .flat_map(|&a| unit.iter().map(move |&b| (a, b)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_validates() {
        let v = RunConfig::default().validate(Path::new(".")).unwrap();
        assert_eq!(v.observation_points.len(), 5);
        assert_eq!(v.observation_points[0], v.spec.origin());
        assert_eq!(v.indices.len(), 4);
        assert_eq!(default_indices(2).len(), 16);
    }

    #[test]
    fn toml_round_trip_and_unknown_keys() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        let text = "bogus = 1\n[grid]\ndim = 1\nsamples_per_axis = 64\nextent = 20.0\n";
        let err = RunConfig::from_toml(text).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn field_level_messages() {
        let message = |cfg: RunConfig| cfg.validate(Path::new(".")).unwrap_err().to_string();
        assert!(message(RunConfig { ensemble_size: 10, ..RunConfig::default() }).contains("ensemble_size"));
        assert!(message(RunConfig { flows: vec!["wave-half".into()], ..RunConfig::default() }).contains("flows"));
        assert!(message(RunConfig { seed: SeedValue::Text("nope".into()), ..RunConfig::default() }).contains("seed"));
        let mut cfg = RunConfig::default();
        cfg.grid.samples_per_axis = 100;
        assert!(cfg.validate(Path::new(".")).unwrap_err().to_string().contains("grid"));
    }

    #[test]
    fn hash_ignores_threads_and_output() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.threads = Some(7);
        b.output_dir = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.seed = SeedValue::Int(2);
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn profiles() {
        assert_eq!(DataProfile::parse("gaussian").unwrap(), DataProfile::Gaussian);
        assert_eq!(DataProfile::parse("mode:0.5,1").unwrap(), DataProfile::Mode(vec![0.5, 1.0]));
        assert_eq!(DataProfile::parse("indicator:1").unwrap(), DataProfile::Indicator(1.0));
        assert!(DataProfile::parse("indicator:-1").is_err());
        assert!(DataProfile::parse("sinc").is_err());
        let spec = GridSpec::new(1, 64, 20.0).unwrap();
        let f = DataProfile::Mode(vec![0.3]).build(spec, Path::new(".")).unwrap();
        assert!((f.values()[0].norm() - 1.0).abs() < 1e-15);
        assert!(DataProfile::Mode(vec![0.3, 0.1]).build(spec, Path::new(".")).is_err());
    }
}
