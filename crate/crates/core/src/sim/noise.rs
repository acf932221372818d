use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the depolarizing rate `δ` maps to a Pauli event rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum NoiseConvention {
    /// With probability `δ` apply one of X, Y, Z uniformly:
    /// `(1−δ)ρ + (δ/3) Σ PρP`.
    UniformPauli,
    /// `(1−δ)ρ + δ·I/2`, i.e. a uniform Pauli with probability `3δ/4`.
    #[default]
    MixedState,
}

impl std::str::FromStr for NoiseConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "uniformpauli" => Ok(NoiseConvention::UniformPauli),
            "mixedstate" => Ok(NoiseConvention::MixedState),
            other => Err(Error::Validation(format!("unknown noise convention `{other}`"))),
        }
    }
}

/// Per-qubit depolarizing noise at gate and measurement sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub delta: f64,
    pub convention: NoiseConvention,
    pub apply_at_gates: bool,
    pub apply_at_measure: bool,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self::new(0.0, NoiseConvention::MixedState)
    }

    pub fn new(delta: f64, convention: NoiseConvention) -> Self {
        NoiseSpec { delta, convention, apply_at_gates: true, apply_at_measure: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::Validation(format!("depolarizing rate {} outside [0, 1]", self.delta)));
        }
        Ok(())
    }

    /// Probability that a site suffers a (uniformly chosen) non-identity Pauli.
    pub fn pauli_rate(&self) -> f64 {
        match self.convention {
            NoiseConvention::UniformPauli => self.delta,
            NoiseConvention::MixedState => 0.75 * self.delta,
        }
    }

    pub fn is_silent(&self) -> bool {
        self.pauli_rate() == 0.0 || !(self.apply_at_gates || self.apply_at_measure)
    }
}
