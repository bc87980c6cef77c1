//! Run configuration: a TOML or JSON file with one section per command,
//! overridden by command-line flags. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RotorError};
use crate::geometry::{Chart, ModelParams};
use crate::pathintegral::{Prescription, RadialGrid};
use crate::suites::{Suite, SuiteOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub dim: usize,
    pub radius: f64,
    pub hbar: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { dim: 3, radius: 1.0, hbar: 1.0 }
    }
}

impl ModelConfig {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.dim, self.radius, self.hbar)
    }
}

/// Eigensolver route of the `spectrum` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    /// Block by block over the separable sectors.
    #[default]
    Sectors,
    /// Dense diagonalization of the full tensor matrix.
    DenseTensor,
    /// Lanczos on the matrix-free tensor operator.
    Lanczos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// Number of levels `l = 0, …, levels − 1` to resolve.
    pub levels: usize,
    /// Grid resolutions; three or more enable extrapolation.
    pub res: Vec<usize>,
    pub method: SpectrumMethod,
    /// Relative tolerance of each level against the closed form.
    pub rel_tol: f64,
    /// Absolute bound on the ground-state energy.
    pub e0_tol: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { levels: 4, res: vec![48, 64, 96], method: SpectrumMethod::Sectors, rel_tol: 1e-8, e0_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub suite: Option<String>,
    pub samples: usize,
    pub points: usize,
    pub resolution: usize,
    pub max_degree: usize,
    pub tolerance: Option<f64>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        let o = SuiteOptions::default();
        Self {
            suite: None,
            samples: o.samples,
            points: o.points,
            resolution: o.resolution,
            max_degree: o.max_degree,
            tolerance: o.tolerance,
        }
    }
}

impl CheckConfig {
    pub fn suite(&self) -> Result<Suite> {
        self.suite.as_deref().ok_or_else(|| RotorError::Config("no suite given".into()))?.parse()
    }

    pub fn options(&self, seed: u64) -> SuiteOptions {
        SuiteOptions {
            samples: self.samples,
            points: self.points,
            seed,
            resolution: self.resolution,
            max_degree: self.max_degree,
            tolerance: self.tolerance,
        }
    }
}

/// Chart of the classical initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StateChart {
    /// Reduced coordinates `q` and conjugate momenta `p`.
    #[default]
    Reduced,
    /// Angles and their conjugate momenta.
    Hyperspherical,
}

impl StateChart {
    pub fn chart(self) -> Chart {
        match self {
            Self::Reduced => Chart::ReducedCartesian,
            Self::Hyperspherical => Chart::Hyperspherical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassicalConfig {
    pub chart: StateChart,
    /// Initial coordinates; empty selects the pole `q = 0`.
    pub q0: Vec<f64>,
    /// Initial momenta; empty selects `p = (0.1, 0, …)`.
    pub p0: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    /// Minimum distance `R − |q|` as a fraction of `R`.
    pub margin: f64,
    /// Bound on the distance between the two integrators.
    pub tolerance: f64,
    /// Bound on the drift of the energy and angular momenta.
    pub conservation_tol: f64,
    /// Every `stride`-th state goes to the trajectory CSV.
    pub stride: usize,
    /// Directory receiving `reduced.csv` and `embedded.csv`.
    pub trajectory_dir: Option<String>,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self {
            chart: StateChart::Reduced,
            q0: Vec::new(),
            p0: Vec::new(),
            t_end: 10.0,
            dt: 1e-3,
            margin: 0.05,
            tolerance: 1e-6,
            conservation_tol: 1e-8,
            stride: 100,
            trajectory_dir: None,
        }
    }
}

impl ClassicalConfig {
    /// Fill in the default initial state for `dim`.
    pub fn resolve(&mut self, dim: usize) {
        if self.q0.is_empty() {
            self.q0 = vec![0.0; dim - 1];
        }
        if self.p0.is_empty() {
            self.p0 = vec![0.0; dim - 1];
            self.p0[0] = 0.1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathIntegralConfig {
    pub hbar: f64,
    pub prescription: Prescription,
    /// Angular modes; each contributes its own test family.
    pub m: Vec<usize>,
    pub eps: Vec<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub r_step: f64,
    pub grid: RadialGrid,
    /// Allowed `|8r²ΔV/ħ² − 1|` for the naive prescription.
    pub fit_tol: f64,
    /// Allowed `|ΔV|/(ħ²/8r²)` for the exact and corrected prescriptions.
    pub cancel_tol: f64,
}

impl Default for PathIntegralConfig {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            prescription: Prescription::NaivePolar,
            m: vec![0, 1],
            eps: vec![4e-3, 2e-3, 1e-3],
            r_min: 0.5,
            r_max: 3.0,
            r_step: 0.25,
            grid: RadialGrid::default(),
            fit_tol: 0.02,
            cancel_tol: 1e-3,
        }
    }
}

/// Everything a config file may set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<String>,
    pub model: ModelConfig,
    pub spectrum: SpectrumConfig,
    pub check: CheckConfig,
    pub classical: ClassicalConfig,
    pub pathintegral: PathIntegralConfig,
}

/// Default seed when neither the file nor the flags give one.
pub const DEFAULT_SEED: u64 = 1;

impl FileConfig {
    /// Parse TOML, or JSON when the path ends in `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RotorError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| RotorError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| RotorError::Config(format!("{}: {e}", path.display())))
        }
    }
}
