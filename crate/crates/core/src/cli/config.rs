//! Experiment configuration (TOML).
//!
//! Every section rejects unknown keys, so a typo is reported by name
//! together with the line it sits on.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coefficients::config::CoefficientConfig;
use crate::error::{Error, Result};
use crate::grid::TorusGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Kernel,
    Solver,
    Regularization,
    Localization,
    Moments,
    Holder,
    Comparison,
    Positivity,
    Tail,
    Critical,
    Superlinear,
    All,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Kernel,
        Suite::Solver,
        Suite::Regularization,
        Suite::Localization,
        Suite::Moments,
        Suite::Holder,
        Suite::Comparison,
        Suite::Positivity,
        Suite::Tail,
        Suite::Critical,
        Suite::Superlinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Kernel => "kernel",
            Suite::Solver => "solver",
            Suite::Regularization => "regularization",
            Suite::Localization => "localization",
            Suite::Moments => "moments",
            Suite::Holder => "holder",
            Suite::Comparison => "comparison",
            Suite::Positivity => "positivity",
            Suite::Tail => "tail",
            Suite::Critical => "critical",
            Suite::Superlinear => "superlinear",
            Suite::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => Suite::ALL.to_vec(),
            s => vec![s],
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub dt: f64,
    #[serde(rename = "T_end")]
    pub t_end: f64,
    #[serde(default = "one")]
    pub snapshot_stride: usize,
}

fn one() -> usize {
    1
}

impl GridConfig {
    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.n, self.dt, self.t_end)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub master_seed: u64,
    pub replicas: usize,
}

/// `u0(x) = value + cos_amplitude · cos(2πx)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub value: f64,
    #[serde(default)]
    pub cos_amplitude: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            value: 1.0,
            cos_amplitude: 0.0,
        }
    }
}

impl InitialConfig {
    pub fn sample(&self, grid: &TorusGrid) -> Vec<f64> {
        grid.sample(|x| self.value + self.cos_amplitude * (std::f64::consts::TAU * x).cos())
    }

    pub fn sup(&self) -> f64 {
        self.value.abs() + self.cos_amplitude.abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    /// Decreasing ε-levels.
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    /// Increasing α-levels.
    #[serde(default = "default_alpha")]
    pub alpha: Vec<f64>,
    /// Increasing truncation levels.
    #[serde(rename = "M", default = "default_m")]
    pub m: Vec<f64>,
    /// Base of the `T_k` ladder, `ε(k) = base^{-k}`.
    #[serde(default = "default_base")]
    pub base: f64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

fn default_eps() -> Vec<f64> {
    vec![(-2.0f64).exp(), (-4.0f64).exp(), (-6.0f64).exp()]
}

fn default_alpha() -> Vec<f64> {
    vec![0.9, 0.99, 0.999]
}

fn default_m() -> Vec<f64> {
    vec![3f64.exp(), 4f64.exp(), 5f64.exp()]
}

fn default_base() -> f64 {
    std::f64::consts::E
}

fn default_k_max() -> usize {
    6
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            eps: default_eps(),
            alpha: default_alpha(),
            m: default_m(),
            base: default_base(),
            k_max: default_k_max(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub comparison: f64,
    /// Largest accepted `P{τ_ε ≤ T}` at the finest level.
    pub positivity_threshold: f64,
    /// Largest relative spread of moments across an α-ladder.
    pub moment_spread: f64,
    pub kernel_mass: f64,
    pub kernel_l2: f64,
    pub semigroup: f64,
    pub cos_decay_rel: f64,
    /// Allowed deviation from the variance oracle, in bootstrap standard
    /// errors.
    pub variance_se: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            comparison: crate::verification::TOL_COMPARISON,
            positivity_threshold: 0.5,
            moment_spread: 0.1,
            kernel_mass: 1e-9,
            kernel_l2: 1e-8,
            semigroup: 1e-10,
            cos_decay_rel: 0.01,
            variance_se: 3.0,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        let all = [
            ("comparison", self.comparison),
            ("positivity_threshold", self.positivity_threshold),
            ("moment_spread", self.moment_spread),
            ("kernel_mass", self.kernel_mass),
            ("kernel_l2", self.kernel_l2),
            ("semigroup", self.semigroup),
            ("cos_decay_rel", self.cos_decay_rel),
            ("variance_se", self.variance_se),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerances.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentsConfig {
    pub p: Vec<f64>,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        Self { p: vec![2.0, 4.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderConfig {
    pub p: f64,
    pub beta: f64,
    /// Time gaps in steps.
    pub time_gaps: Vec<usize>,
    /// Spatial shifts in cells.
    pub space_shifts: Vec<usize>,
    /// Factor applied to the pilot-calibrated `C_β`.
    pub safety: f64,
    pub c_exp: f64,
}

impl Default for HolderConfig {
    fn default() -> Self {
        Self {
            p: 4.0,
            beta: 0.2,
            time_gaps: vec![4, 8, 16, 32],
            space_shifts: vec![4, 8, 16, 32],
            safety: 2.0,
            c_exp: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TailConfig {
    #[serde(rename = "A1")]
    pub a1: Vec<f64>,
    #[serde(rename = "A2")]
    pub a2: Vec<f64>,
    pub p: f64,
    pub beta: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub m_max: u64,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self {
            a1: vec![0.3, 0.6, 0.9],
            a2: vec![0.05, 0.15, 0.24],
            p: 8.0,
            beta: 0.2,
            c: 1.0,
            t: 1.0,
            m_max: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComparisonConfig {
    /// The upper drift is `b + drift_shift · z`.
    pub drift_shift: f64,
    /// The lower initial value is `lower_scale · u0`.
    pub lower_scale: f64,
    /// Coefficient order is checked on `[0, order_range]`.
    pub order_range: f64,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            drift_shift: 0.5,
            lower_scale: 0.9,
            order_range: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_suite")]
    pub suite: Suite,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub coefficients: CoefficientConfig,
    pub grid: GridConfig,
    pub noise: NoiseConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub ladder: LadderConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub moments: MomentsConfig,
    #[serde(default)]
    pub holder: HolderConfig,
    #[serde(default)]
    pub tail: TailConfig,
    #[serde(default)]
    pub comparison: ComparisonConfig,
}

fn default_suite() -> Suite {
    Suite::All
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise.replicas == 0 {
            return Err(Error::Config("noise.replicas must be >= 1".into()));
        }
        if self.grid.snapshot_stride == 0 {
            return Err(Error::Config("grid.snapshot_stride must be >= 1".into()));
        }
        self.tolerances.validate()?;
        self.grid.grid()?;
        self.coefficients.spec()?;
        Ok(())
    }

    /// SHA-256 of the canonical serialisation (hex). The output directory
    /// is not an input and is left out.
    pub fn digest(&self) -> Result<String> {
        let mut canonical = self.clone();
        canonical.out = PathBuf::new();
        Ok(hex_digest(canonical.to_toml()?.as_bytes()))
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
