//! Experiment configuration file schema (JSON, unknown keys rejected).

use foodchain_core::dynamics::IntegratorConfig;
use foodchain_core::model::{ModelParams, State};
use foodchain_core::response::{ResponseKind, ResponseSpec};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    /// Tolerance / window overrides; omitted fields take defaults.
    #[serde(default)]
    pub integrator: Option<IntegratorConfig>,
    /// Initial condition for simulate / lyapunov / extinction / fixed sweeps.
    #[serde(default)]
    pub ic: Option<[f64; 3]>,
    /// Simulation length for `simulate`.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub thresholds: Option<ThresholdsConfig>,
    #[serde(default)]
    pub cycle: Option<CycleConfig>,
    #[serde(default)]
    pub fit: Option<FitConfig>,
    #[serde(default)]
    pub extinction: Option<ExtinctionConfig>,
}

/// Model block: like [`ModelParams`] but d2 may be omitted when a sweep
/// supplies it.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub f1: ResponseSpec,
    pub f2: ResponseSpec,
    pub d1: f64,
    #[serde(default)]
    pub d2: Option<f64>,
}

impl ModelConfig {
    /// Full parameters; any d2 works for d2-swept commands.
    pub fn params(&self, fallback_d2: f64) -> Result<ModelParams, foodchain_core::Error> {
        ModelParams::new(self.f1, self.f2, self.d1, self.d2.unwrap_or(fallback_d2))
    }

    /// Parameters for commands that need an explicit d2.
    pub fn params_with_d2(&self) -> Result<ModelParams, foodchain_core::Error> {
        match self.d2 {
            Some(d2) => ModelParams::new(self.f1, self.f2, self.d1, d2),
            None => Err(foodchain_core::Error::Domain(
                "this command requires model.d2".into(),
            )),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub d2_from: f64,
    pub d2_to: f64,
    pub step: f64,
    #[serde(default)]
    pub policy: SweepPolicy,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SweepPolicy {
    #[default]
    Continuation,
    Fixed,
}

impl SweepConfig {
    pub fn grid(&self) -> Result<Vec<f64>, foodchain_core::Error> {
        if !(self.step > 0.0) || self.d2_from == self.d2_to {
            return Err(foodchain_core::Error::Domain(format!(
                "bad sweep grid: from {}, to {}, step {}",
                self.d2_from, self.d2_to, self.step
            )));
        }
        let sign = (self.d2_to - self.d2_from).signum();
        let n = ((self.d2_to - self.d2_from).abs() / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.d2_from + sign * i as f64 * self.step).collect())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsConfig {
    /// Classify Hopf criticality by cycle search (slower).
    #[serde(default = "default_true")]
    pub classify_hopf: bool,
}

impl Default for ThresholdsConfig {
    fn default() -> Self {
        Self { classify_hopf: true }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleConfig {
    #[serde(default)]
    pub near: CycleTarget,
    /// Optional explicit anchor guess on the section y = y*(d2).
    #[serde(default)]
    pub guess: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CycleTarget {
    /// Innermost cycle around the upper coexistence point.
    #[default]
    UpperInterior,
    /// The attracting cycle of the planar (z = 0) subsystem.
    Boundary,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub target: ResponseSpec,
    pub family: ResponseKind,
    #[serde(default = "default_domain")]
    pub domain: [f64; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub multistart: bool,
    #[serde(default)]
    pub init: Option<[f64; 2]>,
}

fn default_domain() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_samples() -> usize {
    101
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtinctionConfig {
    #[serde(default = "default_horizon")]
    pub horizon: f64,
}

impl Default for ExtinctionConfig {
    fn default() -> Self {
        Self {
            horizon: default_horizon(),
        }
    }
}

fn default_horizon() -> f64 {
    50_000.0
}

/// Default interior initial condition (used throughout the experiments).
pub fn default_ic() -> State {
    State::new(0.45, 0.5, 0.8)
}
