//! Experiment configuration, read from JSON.

use std::fs;
use std::path::{Path, PathBuf};

use kerrsim_core::fock::FORWARD_DIM;
use kerrsim_core::gate::SuperpositionParams;
use kerrsim_core::homodyne::DEFAULT_PHASES;
use kerrsim_core::tomography::TomographyConfig;
use kerrsim_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Which superposition coefficients drive the gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ParameterMode {
    /// `B/A = -3-√2`.
    Ideal,
    /// `|B/A| = 5.97` with the extra `-π/7` phase.
    BestFit,
    Custom {
        a_re: f64,
        a_im: f64,
        b_re: f64,
        b_im: f64,
    },
}

impl ParameterMode {
    pub fn params(&self) -> Result<SuperpositionParams> {
        match *self {
            ParameterMode::Ideal => Ok(SuperpositionParams::ideal()),
            ParameterMode::BestFit => Ok(SuperpositionParams::best_fit()),
            ParameterMode::Custom { a_re, a_im, b_re, b_im } => {
                SuperpositionParams::new(C64::new(a_re, a_im), C64::new(b_re, b_im))
                    .map_err(|e| Error::Config(format!("custom mode: {e}")))
            }
        }
    }

    /// Modes whose output must show the vacuum sign flip.
    pub fn expects_signature(&self) -> bool {
        !matches!(self, ParameterMode::Custom { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ParameterMode::Ideal => "ideal",
            ParameterMode::BestFit => "bestfit",
            ParameterMode::Custom { .. } => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomographySettings {
    pub dim: usize,
    pub bin_width: f64,
    pub x_range: f64,
    pub max_iterations: usize,
    pub dilution: f64,
    pub stop_tolerance: f64,
}

impl Default for TomographySettings {
    fn default() -> Self {
        let d = TomographyConfig::default();
        TomographySettings {
            dim: d.dim,
            bin_width: d.bin_width,
            x_range: d.x_range,
            max_iterations: d.max_iterations,
            dilution: d.dilution,
            stop_tolerance: d.stop_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub alphas: Vec<f64>,
    pub mode: ParameterMode,
    /// Detection efficiency, used both for the loss and for its compensation.
    pub eta: f64,
    pub phases: usize,
    pub samples_per_phase: usize,
    pub seed: u64,
    pub forward_dim: usize,
    pub output_dir: PathBuf,
    pub tomography: TomographySettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            alphas: vec![0.23, 0.53, 0.79],
            mode: ParameterMode::Ideal,
            eta: 0.66,
            phases: DEFAULT_PHASES,
            samples_per_phase: 16_667,
            seed: 20_100_219,
            forward_dim: FORWARD_DIM,
            output_dir: PathBuf::from("out"),
            tomography: TomographySettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn tomography_config(&self) -> TomographyConfig {
        let t = &self.tomography;
        TomographyConfig {
            dim: t.dim,
            eta: self.eta,
            bin_width: t.bin_width,
            x_range: t.x_range,
            max_iterations: t.max_iterations,
            dilution: t.dilution,
            stop_tolerance: t.stop_tolerance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.alphas.is_empty() {
            return fail("alphas must not be empty");
        }
        if self.alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return fail("alphas must be finite and nonnegative");
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return fail("eta must lie in (0, 1]");
        }
        if self.phases < 2 {
            return fail("at least two phases are needed");
        }
        if self.samples_per_phase == 0 {
            return fail("samples_per_phase must be positive");
        }
        if self.forward_dim < 3 {
            return fail("forward_dim must be at least 3");
        }
        if self.tomography.dim > self.forward_dim {
            return fail("tomography dim cannot exceed forward_dim");
        }
        if self.tomography.dim < 3 {
            return fail("tomography dim must be at least 3");
        }
        self.mode.params()?;
        self.tomography_config()
            .validate()
            .map_err(|e| Error::Config(format!("tomography: {e}")))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.phases * c.samples_per_phase, 200_004);
        assert_eq!(c.tomography_config().dim, 8);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"alphas":[0.5],"mode":{"kind":"bestfit"}}"#).unwrap();
        assert_eq!(c.mode, ParameterMode::BestFit);
        assert_eq!(c.eta, 0.66);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let d = ExperimentConfig::default;
        assert!(ExperimentConfig { eta: 1.5, ..d() }.validate().is_err());
        assert!(ExperimentConfig {
            alphas: vec![-0.1],
            ..d()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            schema_version: 7,
            ..d()
        }
        .validate()
        .is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"alpha":[0.5]}"#).is_err());
    }
}
