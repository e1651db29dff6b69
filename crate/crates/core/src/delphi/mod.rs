//! Multi-round Delphi elicitation: a panel of role-conditioned experts
//! answers, sees the round's statistics, and answers again until the
//! spread falls below a threshold or the round limit is hit.

mod backend;
mod estimate;
#[cfg(feature = "remote")]
mod remote;
mod session;
mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundled::ROLES;

pub use backend::{
    BackendError, BackendSpec, ExpertBackend, ExpertRequest, RoundFeedback, ScriptedBackend, SimulatedBackend,
};
pub use estimate::{
    benchmark, estimate_defeater_probability, load_scenarios, run_benchmark, run_scenario, BenchmarkReport,
    DefeaterEstimate, LoadedScenarios, Outcome, Scenario, ScenarioResult,
};
#[cfg(feature = "remote")]
pub use remote::{RemoteBackend, ENDPOINT_ENV, TOKEN_ENV};
pub use session::{run_session, DelphiSession, DroppedExpert, Round, MAX_RETRIES};
pub use stats::{calibration, credible_interval, format_percent_pm, DEFAULT_LEVEL, DEFAULT_PSEUDO_COUNTS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DelphiError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("session failed: every expert was dropped in round {round}")]
    SessionFailed { round: usize },
    #[error("scenarios: {0}")]
    Scenarios(String),
    #[error("backend: {0}")]
    Backend(String),
    #[error("aborted after {} completed runs: {source}", completed.len())]
    Aborted { completed: Vec<f64>, source: Box<DelphiError> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expert {
    pub index: usize,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Panel {
    pub experts: Vec<Expert>,
    pub roles: Vec<String>,
}

pub const DEFAULT_PANEL_SIZE: usize = 50;

/// The bundled role list.
pub fn default_roles() -> Vec<String> {
    ROLES.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect()
}

/// Expert `i` gets `roles[i % roles.len()]`.
pub fn assign_roles(n_experts: usize, roles: &[String]) -> Result<Panel, DelphiError> {
    if n_experts == 0 {
        return Err(DelphiError::InvalidInput("a panel needs at least one expert".into()));
    }
    if roles.is_empty() {
        return Err(DelphiError::InvalidInput("role list is empty".into()));
    }
    let experts = (0..n_experts)
        .map(|index| Expert { index, role: roles[index % roles.len()].clone() })
        .collect();
    Ok(Panel { experts, roles: roles.to_vec() })
}

impl Panel {
    pub fn n_experts(&self) -> usize {
        self.experts.len()
    }
}

impl Default for Panel {
    fn default() -> Self {
        assign_roles(DEFAULT_PANEL_SIZE, &default_roles()).expect("bundled roles are non-empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DelphiConfig {
    pub max_rounds: usize,
    /// Consensus when the round's population std is strictly below this.
    pub consensus_sigma: f64,
    pub temperature_hint: f64,
    pub weight_epsilon: f64,
    pub seed: u64,
}

impl Default for DelphiConfig {
    fn default() -> Self {
        DelphiConfig { max_rounds: 5, consensus_sigma: 0.10, temperature_hint: 1.5, weight_epsilon: 1e-6, seed: 0 }
    }
}

impl DelphiConfig {
    pub fn validate(&self) -> Result<(), DelphiError> {
        if self.max_rounds < 1 {
            return Err(DelphiError::InvalidConfig("max_rounds must be at least 1".into()));
        }
        if !(self.consensus_sigma > 0.0 && self.consensus_sigma < 1.0) {
            return Err(DelphiError::InvalidConfig(format!("consensus_sigma {} outside (0, 1)", self.consensus_sigma)));
        }
        if !(self.weight_epsilon.is_finite() && self.weight_epsilon > 0.0) {
            return Err(DelphiError::InvalidConfig(format!("weight_epsilon {} must be positive", self.weight_epsilon)));
        }
        if !(self.temperature_hint.is_finite() && self.temperature_hint >= 0.0) {
            return Err(DelphiError::InvalidConfig(format!("temperature_hint {} must be non-negative", self.temperature_hint)));
        }
        Ok(())
    }

    /// The same config with a seed derived for run `run`.
    pub fn for_run(&self, run: u64) -> DelphiConfig {
        DelphiConfig { seed: mix(&[self.seed, 0x5255_4e00, run]), ..*self }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a tuple of integers into one well-mixed seed.
pub(crate) fn mix(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6361_655f_6465_6c70, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}
