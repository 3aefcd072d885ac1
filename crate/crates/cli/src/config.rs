//! Run configuration: built-in defaults, overridden by an optional TOML
//! file, overridden by command-line flags.

use abspin_core::amplitude::{angle_grid, MIN_M_MAX};
use abspin_core::filament::{Prescription, RadiusSchedule};
use abspin_core::polarimetry::PolarizationSetup;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            count: 64,
            min: PI / 64.0,
            max: PI,
        }
    }
}

impl GridSpec {
    pub fn angles(&self) -> Result<Vec<f64>, CliError> {
        Ok(angle_grid(self.count, self.min, self.max)?)
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub k: f64,
    pub m_max: u32,
    pub radius_schedule: RadiusSchedule,
    pub phi_grid: GridSpec,
    pub prescription: Prescription,
    pub setup: Option<PolarizationSetup>,
    pub format: OutputFormat,
    /// Seed and sample count of the randomized limit checks.
    pub seed: u64,
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            k: 1.0,
            m_max: 200,
            radius_schedule: RadiusSchedule::default(),
            phi_grid: GridSpec::default(),
            prescription: Prescription::SingularAllowed,
            setup: None,
            format: OutputFormat::Csv,
            seed: 20_240_101,
            samples: 1000,
        }
    }
}

/// Every field optional; the shape of both the TOML file and the flag set.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub alpha: Option<f64>,
    pub k: Option<f64>,
    pub m_max: Option<u32>,
    pub radius_schedule: Option<Vec<f64>>,
    pub phi_grid: Option<PartialGrid>,
    pub prescription: Option<Prescription>,
    pub setup: Option<PartialSetup>,
    pub format: Option<OutputFormat>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialGrid {
    pub count: Option<usize>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialSetup {
    pub n: Option<[f64; 3]>,
    pub n_prime: Option<[f64; 3]>,
}

impl PartialConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    /// Fields set in `other` win.
    pub fn overridden_by(self, other: PartialConfig) -> PartialConfig {
        let grid = match (self.phi_grid, other.phi_grid) {
            (Some(a), Some(b)) => Some(PartialGrid {
                count: b.count.or(a.count),
                min: b.min.or(a.min),
                max: b.max.or(a.max),
            }),
            (a, b) => b.or(a),
        };
        let setup = match (self.setup, other.setup) {
            (Some(a), Some(b)) => Some(PartialSetup {
                n: b.n.or(a.n),
                n_prime: b.n_prime.or(a.n_prime),
            }),
            (a, b) => b.or(a),
        };
        PartialConfig {
            alpha: other.alpha.or(self.alpha),
            k: other.k.or(self.k),
            m_max: other.m_max.or(self.m_max),
            radius_schedule: other.radius_schedule.or(self.radius_schedule),
            phi_grid: grid,
            prescription: other.prescription.or(self.prescription),
            setup,
            format: other.format.or(self.format),
            seed: other.seed.or(self.seed),
            samples: other.samples.or(self.samples),
        }
    }

    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let d = RunConfig::default();
        let grid = self.phi_grid.unwrap_or_default();
        let setup = match self.setup {
            None => None,
            Some(PartialSetup { n: Some(n), n_prime: Some(np) }) => {
                Some(PolarizationSetup::new(Vector3::from(n), Vector3::from(np))?)
            }
            Some(_) => return Err(CliError::Config("setup needs both n and n_prime".into())),
        };
        let radius_schedule = match self.radius_schedule {
            Some(v) => RadiusSchedule::new(v)?,
            None => d.radius_schedule,
        };
        let cfg = RunConfig {
            alpha: self.alpha.unwrap_or(d.alpha),
            k: self.k.unwrap_or(d.k),
            m_max: self.m_max.unwrap_or(d.m_max),
            radius_schedule,
            phi_grid: GridSpec {
                count: grid.count.unwrap_or(d.phi_grid.count),
                min: grid.min.unwrap_or(d.phi_grid.min),
                max: grid.max.unwrap_or(d.phi_grid.max),
            },
            prescription: self.prescription.unwrap_or(d.prescription),
            setup,
            format: self.format.unwrap_or(d.format),
            seed: self.seed.unwrap_or(d.seed),
            samples: self.samples.unwrap_or(d.samples),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !self.alpha.is_finite() {
            return Err(CliError::Config(format!("alpha = {} is not finite", self.alpha)));
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(CliError::Config(format!("k = {} must be positive and finite", self.k)));
        }
        if self.m_max < MIN_M_MAX {
            return Err(CliError::Config(format!("m_max = {} is below {MIN_M_MAX}", self.m_max)));
        }
        if self.samples == 0 {
            return Err(CliError::Config("samples must be positive".into()));
        }
        self.phi_grid.angles()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: PartialConfig = toml::from_str(
            r#"
            alpha = 0.7
            m_max = 80
            [phi_grid]
            count = 10
            min = 0.5
            "#,
        )
        .unwrap();
        let flags = PartialConfig {
            alpha: Some(0.25),
            phi_grid: Some(PartialGrid { count: Some(12), ..Default::default() }),
            ..Default::default()
        };
        let cfg = file.overridden_by(flags).resolve().unwrap();
        assert_eq!(cfg.alpha, 0.25);
        assert_eq!(cfg.m_max, 80);
        assert_eq!(cfg.phi_grid, GridSpec { count: 12, min: 0.5, max: PI });
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<PartialConfig>("alpah = 0.3").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let bad = |p: PartialConfig| p.resolve().is_err();
        assert!(bad(PartialConfig { k: Some(0.0), ..Default::default() }));
        assert!(bad(PartialConfig { alpha: Some(f64::NAN), ..Default::default() }));
        assert!(bad(PartialConfig { m_max: Some(10), ..Default::default() }));
        assert!(bad(PartialConfig {
            phi_grid: Some(PartialGrid { count: Some(3), min: Some(-0.5), max: Some(0.5) }),
            ..Default::default()
        }));
        assert!(bad(PartialConfig {
            setup: Some(PartialSetup { n: Some([1.0, 1.0, 0.0]), n_prime: Some([0.0, 0.0, 1.0]) }),
            ..Default::default()
        }));
        assert!(bad(PartialConfig {
            setup: Some(PartialSetup { n: Some([1.0, 0.0, 0.0]), n_prime: None }),
            ..Default::default()
        }));
    }
}
