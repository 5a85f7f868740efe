//! Experiment configuration: one strict JSON document per run.
//!
//! Unknown keys are rejected everywhere, so a typo in a sweep generator
//! fails loudly instead of silently running the default it shadowed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diag::FunctionalSpec;
use crate::error::Error;
use crate::Result;
use crate::evolve::{suggest_dt, Dealias};
use crate::field::SpectralField;
use crate::grid::make_grid;
use crate::initial::InitialData;
use crate::params::ModelParams;

/// Environment variable consulted when a config names no output directory.
pub const OUTPUT_DIR_ENV: &str = "BENKDV_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub length: f64,
    pub n: usize,
}

/// Either a literal step size or a stability-based suggestion; configs write
/// `"dt": 1e-3` or `"dt": {"safety": 0.5}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtSpec {
    Fixed(f64),
    Suggested { safety: f64 },
}

impl DtSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            DtSpec::Fixed(dt) if !(dt > 0.0 && dt.is_finite()) => Err(Error::Config(
                format!("dt must be positive and finite, got {dt}"),
            )),
            DtSpec::Suggested { safety } if !(safety > 0.0 && safety <= 1.0) => Err(
                Error::Config(format!("dt safety factor must lie in (0, 1], got {safety}")),
            ),
            _ => Ok(()),
        }
    }

    /// Concrete step size for this data; suggestions are capped at the
    /// horizon so linear models do not step past it in one go.
    pub fn resolve(&self, u0: &SpectralField, params: &ModelParams, t_end: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            DtSpec::Fixed(dt) => dt,
            DtSpec::Suggested { safety } => suggest_dt(u0, params, safety).min(t_end),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    pub dt: DtSpec,
    pub t_end: f64,
    #[serde(default = "default_dealias")]
    pub dealias: Dealias,
    #[serde(default = "default_output_every")]
    pub output_every: usize,
    /// Outer-domain mass fraction treated as contamination; 1 disables the
    /// check.
    #[serde(default = "default_boundary_threshold")]
    pub boundary_mass_threshold: f64,
}

fn default_dealias() -> Dealias {
    Dealias::TwoThirds
}

fn default_output_every() -> usize {
    1
}

fn default_boundary_threshold() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    pub grid: GridSpec,
    pub evolve: EvolveSection,
    pub initial_data: InitialData,
    #[serde(default)]
    pub diagnostics: Vec<FunctionalSpec>,
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Also run the operator check suite and write its summary.
    #[serde(default)]
    pub opcheck: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let config: ExperimentConfig = serde_json::from_str(text)
            .map_err(|err| Error::Config(format!("malformed config: {err}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        text
    }

    /// Structural checks that need no realized data; descriptor-level and
    /// data-dependent validation happens when the experiment runs.
    pub fn validate(&self) -> Result<()> {
        self.model
            .validate()
            .map_err(|err| Error::Config(err.to_string()))?;
        make_grid(self.grid.length, self.grid.n)
            .map_err(|err| Error::Config(err.to_string()))?;
        if !(self.evolve.t_end > 0.0 && self.evolve.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end must be positive and finite, got {}",
                self.evolve.t_end
            )));
        }
        if self.evolve.output_every == 0 {
            return Err(Error::Config("output_every must be at least 1".into()));
        }
        if !(self.evolve.boundary_mass_threshold > 0.0) {
            return Err(Error::Config(format!(
                "boundary_mass_threshold must be positive, got {}",
                self.evolve.boundary_mass_threshold
            )));
        }
        self.evolve.dt.validate()?;
        self.evolve
            .dealias
            .validate()
            .map_err(|err| Error::Config(err.to_string()))?;
        Ok(())
    }

    /// Explicit config path, then the environment override, then `runs/`.
    pub fn resolve_output_dir(&self) -> PathBuf {
        if let Some(dir) = &self.output_dir {
            return dir.clone();
        }
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                return PathBuf::from(dir);
            }
        }
        PathBuf::from("runs")
    }
}
