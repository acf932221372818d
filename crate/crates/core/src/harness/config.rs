use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::builder::Style;
use crate::error::{Error, Result};
use crate::sim::NoiseConvention;
use crate::tomography::DEFAULT_MIN_SHOTS;

fn default_theta() -> f64 {
    FRAC_PI_4
}
fn default_n() -> Vec<u32> {
    vec![2, 4, 5, 6, 7, 8]
}
fn default_delta() -> Vec<f64> {
    vec![0.0, 0.01, 0.05, 0.1]
}
fn default_shots() -> u64 {
    100_000
}
fn default_true() -> bool {
    true
}
fn default_min_shots() -> u64 {
    DEFAULT_MIN_SHOTS
}

/// Grid of an experiment run. Missing JSON fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_n")]
    pub n: Vec<u32>,
    #[serde(default = "default_delta")]
    pub delta: Vec<f64>,
    /// Shots per (input state, basis) circuit.
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub convention: NoiseConvention,
    #[serde(default)]
    pub style: Style,
    /// Strip trailing zero bits of `k`; off reproduces a forced `n`.
    #[serde(default = "default_true")]
    pub reduce: bool,
    /// Tomography refuses cells with fewer heralded shots.
    #[serde(default = "default_min_shots")]
    pub min_shots: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            theta: default_theta(),
            n: default_n(),
            delta: default_delta(),
            shots: default_shots(),
            seed: 0,
            convention: NoiseConvention::default(),
            style: Style::default(),
            reduce: true,
            min_shots: default_min_shots(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::Validation("shots must be at least 1".into()));
        }
        if let Some(n) = self.n.iter().find(|&&n| n < 2) {
            return Err(Error::Validation(format!("n = {n}: at least 2 outer ancillas are required")));
        }
        if self.n.is_empty() || self.delta.is_empty() {
            return Err(Error::Validation("empty n or delta grid".into()));
        }
        if let Some(d) = self.delta.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return Err(Error::Validation(format!("depolarizing rate {d} outside [0, 1]")));
        }
        if !self.theta.is_finite() {
            return Err(Error::Validation("theta must be finite".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let cfg = ExperimentConfig::from_json(r#"{"seed": 7, "n": [2, 3]}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.n, [2, 3]);
        assert_eq!(cfg.delta, default_delta());
        assert_eq!(cfg.shots, 100_000);
    }

    #[test]
    fn round_trip_is_lossless() {
        let cfg = ExperimentConfig {
            theta: 0.1 + 0.2,
            delta: vec![1.0 / 3.0, 0.07],
            convention: NoiseConvention::UniformPauli,
            style: Style::Naive,
            ..Default::default()
        };
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn invalid_configs() {
        for bad in [r#"{"shots": 0}"#, r#"{"n": [1]}"#, r#"{"delta": [1.5]}"#, r#"{"sedd": 1}"#, r#"{"n": []}"#] {
            assert!(ExperimentConfig::from_json(bad).is_err(), "{bad}");
        }
    }
}
