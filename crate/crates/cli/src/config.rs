//! Run configuration, read from TOML. Every field has a default, so an empty
//! file is a complete configuration.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use structure_core::calibration::{NoiseModel, ThetaGrid};
use structure_core::emd::{EmdConfig, EmdSolver};
use structure_core::forward::PerlinParams;
use structure_core::inversion::InversionConfig;

use crate::error::{CliError, CliResult};
use crate::signal::RingSpec;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum ExperimentId {
    /// One-parameter sweep with residual and flux snapshots.
    #[default]
    #[serde(rename = "1")]
    #[value(name = "1")]
    One,
    /// Two-parameter sweeps at several noise levels.
    #[serde(rename = "2")]
    #[value(name = "2")]
    Two,
    /// Two-parameter sweeps over a ladder of measurement grids.
    #[serde(rename = "3")]
    #[value(name = "3")]
    Three,
    #[serde(rename = "noise-scaling")]
    #[value(name = "noise-scaling")]
    NoiseScaling,
    #[serde(rename = "restriction")]
    #[value(name = "restriction")]
    Restriction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderConfig {
    /// Fixed signal grid size.
    pub nx: usize,
    /// Measurement grid sizes, one sweep each.
    pub ny_list: Vec<usize>,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self { nx: 25, ny_list: vec![100, 75, 50, 25] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseScalingConfig {
    pub d: usize,
    pub ells: Vec<u32>,
    pub trials: usize,
    pub sigma: f64,
    pub resolution: usize,
    pub solver: EmdSolver,
}

impl Default for NoiseScalingConfig {
    fn default() -> Self {
        Self { d: 2, ells: (2..=7).collect(), trials: 32, sigma: 1.0, resolution: 128, solver: EmdSolver::NetworkSimplex }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothField {
    /// `phi(y) = y1`.
    Ramp,
    /// `phi(y) = sin(pi y1) sin(pi y2)`.
    SinSin,
}

impl SmoothField {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ramp => "ramp",
            Self::SinSin => "sin-sin",
        }
    }

    pub fn eval(self, x: f64, y: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            Self::Ramp => x,
            Self::SinSin => (PI * x).sin() * (PI * y).sin(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RestrictionConfig {
    pub ells: Vec<u32>,
    pub ell_ref: u32,
    pub fields: Vec<SmoothField>,
    pub solver: EmdSolver,
}

impl Default for RestrictionConfig {
    fn default() -> Self {
        Self {
            ells: vec![3, 4, 5, 6],
            ell_ref: 7,
            fields: vec![SmoothField::Ramp, SmoothField::SinSin],
            solver: EmdSolver::NetworkSimplex,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub operator_seed: u64,
    /// Signal grid is `nx x nx` on the unit square.
    pub nx: usize,
    /// Measurement grid is `ny x ny` on the unit square.
    pub ny: usize,
    /// Spacing of the uniform theta grid, used unless `theta_grid` is given.
    pub theta_step: f64,
    pub theta_grid: Option<ThetaGrid>,
    /// Defaults to `0` for one parameter and `(0.5, 0.5)` for two.
    pub theta_hat: Option<Vec<f64>>,
    /// Noise levels of experiment 2.
    pub snr_list: Vec<f64>,
    /// Parameters at which experiment 1 stores residuals and fluxes.
    pub snapshot_thetas: Vec<f64>,
    pub ladder: LadderConfig,
    pub signal: RingSpec,
    pub perlin: PerlinParams,
    pub inversion: InversionConfig,
    pub emd: EmdConfig,
    pub noise: NoiseModel,
    pub noise_scaling: NoiseScalingConfig,
    pub restriction: RestrictionConfig,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            id: ExperimentId::One,
            operator_seed: 1,
            nx: 64,
            ny: 100,
            theta_step: 0.05,
            theta_grid: None,
            theta_hat: None,
            snr_list: vec![25.0, 5.0],
            snapshot_thetas: vec![0.04, 0.48],
            ladder: LadderConfig::default(),
            signal: RingSpec::default(),
            perlin: PerlinParams::default(),
            inversion: InversionConfig::default(),
            emd: EmdConfig::default(),
            noise: NoiseModel::default(),
            noise_scaling: NoiseScalingConfig::default(),
            restriction: RestrictionConfig::default(),
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&s).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// One seed for both the operator draw and the noise.
    pub fn reseed(&mut self, seed: u64) {
        self.operator_seed = seed;
        self.noise.seed = seed;
    }

    pub fn theta_grid(&self, dim: usize) -> CliResult<ThetaGrid> {
        let grid = match &self.theta_grid {
            Some(g) => g.clone(),
            None => ThetaGrid::uniform(dim, self.theta_step)?,
        };
        if grid.dim() != dim {
            return Err(CliError::Config(format!("theta grid has {} axes, experiment needs {dim}", grid.dim())));
        }
        Ok(grid)
    }

    pub fn theta_hat(&self, dim: usize) -> CliResult<Vec<f64>> {
        let t = self.theta_hat.clone().unwrap_or_else(|| if dim == 1 { vec![0.0] } else { vec![0.5; dim] });
        if t.len() != dim {
            return Err(CliError::Config(format!("theta_hat has {} entries, experiment needs {dim}", t.len())));
        }
        Ok(t)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.inversion.validate()?;
        self.emd.validate()?;
        self.signal.validate()?;
        if self.nx < 8 || self.ny == 0 || self.ladder.nx < 8 || self.ladder.ny_list.contains(&0) {
            return Err(CliError::Config("grid sizes must be positive and signals at least 8 wide".into()));
        }
        if self.snr_list.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(CliError::Config("snr_list entries must be positive".into()));
        }
        Ok(())
    }
}
