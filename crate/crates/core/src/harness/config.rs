use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{NoiseConfig, SimulationConfig};
use crate::gmm::GmmConfig;
use crate::mlp::scg::ScgOptions;
use crate::svm::SvmConfig;

pub const CONFIG_FORMAT_VERSION: u32 = 1;

/// Measurement noise level used when no config file overrides it; see
/// [`calibrate_noise`](super::calibrate_noise).
pub const DEFAULT_NOISE: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: 8,
            max_iters: 500,
            grad_tol: 1e-6,
        }
    }
}

impl MlpConfig {
    pub fn scg_options(&self) -> ScgOptions {
        ScgOptions {
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            ..ScgOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub format_version: u32,
    pub simulation: SimulationConfig,
    pub pca_dim: usize,
    pub mlp: MlpConfig,
    pub svm: SvmConfig,
    pub gmm: GmmConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            format_version: CONFIG_FORMAT_VERSION,
            simulation: SimulationConfig {
                noise: NoiseConfig::uniform(DEFAULT_NOISE),
                ..SimulationConfig::default()
            },
            pca_dim: 10,
            mlp: MlpConfig::default(),
            svm: SvmConfig::default(),
            gmm: GmmConfig::default(),
            seed: 0,
            output_dir: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.format_version != CONFIG_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported config format_version {} (expected {CONFIG_FORMAT_VERSION})",
                self.format_version
            )));
        }
        self.simulation.validate()?;
        let n_features = self.simulation.n_modes * (self.simulation.cylinder.n_dof + 1);
        if self.pca_dim == 0 || self.pca_dim > n_features {
            return Err(Error::validation(format!(
                "pca_dim must be in 1..={n_features}, got {}",
                self.pca_dim
            )));
        }
        if self.mlp.hidden == 0 {
            return Err(Error::validation("mlp.hidden must be at least 1"));
        }
        if !(self.svm.c > 0.0) {
            return Err(Error::validation("svm.c must be positive"));
        }
        if let Some(k) = &self.svm.kernel {
            k.validate()?;
        }
        if self.gmm.components == 0 || !(self.gmm.floor_scale > 0.0) {
            return Err(Error::validation("gmm needs at least one component and a positive floor"));
        }
        Ok(())
    }

    pub fn with_noise(mut self, level: f64) -> Self {
        self.simulation.noise = NoiseConfig::uniform(level);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
