use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::DelphiError;

/// Statistics of the previous round shown to every expert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundFeedback {
    pub round: usize,
    pub mean: f64,
    pub std: f64,
    /// Ascending.
    pub responses: Vec<f64>,
    pub text: String,
}

impl RoundFeedback {
    pub fn new(round: usize, mut responses: Vec<f64>, mean: f64, std: f64) -> Self {
        responses.sort_by(f64::total_cmp);
        let mut text = format!("Round {round} summary: mean {mean:.4}, std {std:.4}, responses [");
        for (i, r) in responses.iter().enumerate() {
            if i > 0 {
                text.push_str(", ");
            }
            let _ = write!(text, "{r:.4}");
        }
        text.push(']');
        RoundFeedback { round, mean, std, responses, text }
    }
}

/// One question put to one expert.
#[derive(Debug, Clone, Copy)]
pub struct ExpertRequest<'a> {
    pub expert: usize,
    pub role: &'a str,
    pub scenario: &'a str,
    pub scenario_id: Option<&'a str>,
    /// 1-based.
    pub round: usize,
    pub attempt: u32,
    pub prior_round: Option<&'a RoundFeedback>,
    pub temperature: f64,
}

impl ExpertRequest<'_> {
    /// Role-conditioned prompt for text-generation backends.
    pub fn prompt(&self) -> String {
        let mut p = format!(
            "You are a {}. Estimate the probability that the following happens.\n\nScenario: {}\n",
            self.role, self.scenario
        );
        if let Some(prev) = self.prior_round {
            let _ = write!(p, "\nOther experts answered last round. {}\nYou may revise your estimate.\n", prev.text);
        }
        p.push_str("\nReply with a single percentage, for example \"35%\".");
        p
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("no scripted response for {0}")]
    NoScript(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("unparseable response: {0:?}")]
    Unparseable(String),
}

/// Source of expert answers. Values outside [0, 1] are returned as-is; the
/// session rejects and re-requests them.
pub trait ExpertBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn submit(&self, request: &ExpertRequest<'_>, rng: &mut ChaCha8Rng) -> Result<f64, BackendError>;
}

/// Fixed answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptedBackend {
    /// Every expert, every round.
    Constant(f64),
    /// Expert index to per-round answers; the last answer repeats.
    Schedule(BTreeMap<usize, Vec<f64>>),
    /// Scenario id (or, failing that, scenario text) to an answer.
    ByScenario(BTreeMap<String, f64>),
}

impl ExpertBackend for ScriptedBackend {
    fn name(&self) -> &'static str {
        "scripted"
    }

    fn submit(&self, req: &ExpertRequest<'_>, _rng: &mut ChaCha8Rng) -> Result<f64, BackendError> {
        match self {
            ScriptedBackend::Constant(v) => Ok(*v),
            ScriptedBackend::Schedule(s) => s
                .get(&req.expert)
                .and_then(|answers| answers.get(req.round - 1).or(answers.last()))
                .copied()
                .ok_or_else(|| BackendError::NoScript(format!("expert {}", req.expert))),
            ScriptedBackend::ByScenario(m) => req
                .scenario_id
                .and_then(|id| m.get(id))
                .or_else(|| m.get(req.scenario))
                .copied()
                .ok_or_else(|| BackendError::NoScript(format!("scenario {}", req.scenario_id.unwrap_or(req.scenario)))),
        }
    }
}

fn half() -> f64 {
    0.5
}

/// Noisy draws around a known centre. From round 2 on, each draw is pulled
/// toward the previous round's mean by `pull`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedBackend {
    pub centre: f64,
    pub noise: f64,
    #[serde(default = "half")]
    pub pull: f64,
}

impl SimulatedBackend {
    pub fn new(centre: f64, noise: f64) -> Self {
        SimulatedBackend { centre, noise, pull: 0.5 }
    }
}

impl ExpertBackend for SimulatedBackend {
    fn name(&self) -> &'static str {
        "simulated"
    }

    fn submit(&self, req: &ExpertRequest<'_>, rng: &mut ChaCha8Rng) -> Result<f64, BackendError> {
        let z: f64 = rng.sample(StandardNormal);
        let own = self.centre + self.noise * z;
        Ok(match req.prior_round {
            Some(prev) => self.pull * prev.mean + (1.0 - self.pull) * own,
            None => own,
        })
    }
}

/// Serializable backend selection for the CLI and service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendSpec {
    Scripted { script: ScriptedBackend },
    Simulated(SimulatedBackend),
    Remote {
        #[serde(default)]
        endpoint: Option<String>,
    },
}

impl BackendSpec {
    /// Scripted and simulated backends need no network.
    pub fn is_fixture(&self) -> bool {
        !matches!(self, BackendSpec::Remote { .. })
    }

    pub fn build(&self) -> Result<Box<dyn ExpertBackend>, DelphiError> {
        match self {
            BackendSpec::Scripted { script } => Ok(Box::new(script.clone())),
            BackendSpec::Simulated(s) => {
                if !(s.noise.is_finite() && s.noise >= 0.0 && (0.0..=1.0).contains(&s.pull)) {
                    return Err(DelphiError::InvalidConfig("simulated backend needs noise >= 0 and pull in [0, 1]".into()));
                }
                Ok(Box::new(s.clone()))
            }
            #[cfg(feature = "remote")]
            BackendSpec::Remote { endpoint } => {
                let backend = match endpoint {
                    Some(url) => super::RemoteBackend::new(url.clone(), std::env::var(super::TOKEN_ENV).ok()),
                    None => super::RemoteBackend::from_env(),
                };
                Ok(Box::new(backend.map_err(|e| DelphiError::Backend(e.to_string()))?))
            }
            #[cfg(not(feature = "remote"))]
            BackendSpec::Remote { .. } => Err(DelphiError::Backend("built without the remote feature".into())),
        }
    }
}
