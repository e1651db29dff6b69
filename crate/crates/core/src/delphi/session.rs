use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{credible_interval, population_std, weighted_mean, DEFAULT_LEVEL, DEFAULT_PSEUDO_COUNTS};
use super::{mix, DelphiConfig, DelphiError, Expert, ExpertBackend, ExpertRequest, Panel, RoundFeedback};

/// Re-requests after a rejected answer before the expert is dropped from
/// the round.
pub const MAX_RETRIES: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedExpert {
    pub expert: usize,
    pub attempts: u32,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    /// 1-based.
    pub index: usize,
    pub responses: BTreeMap<usize, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped: Vec<DroppedExpert>,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub summary_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelphiSession {
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_id: Option<String>,
    pub backend: String,
    pub panel: Panel,
    pub config: DelphiConfig,
    pub rounds: Vec<Round>,
    pub final_estimate: f64,
    pub credible_interval: (f64, f64),
    pub consensus_reached_at: Option<usize>,
    /// Normalised aggregation weight of each final-round respondent.
    pub weights: BTreeMap<usize, f64>,
}

impl DelphiSession {
    pub fn final_round(&self) -> &Round {
        self.rounds.last().expect("a session has at least one round")
    }

    /// Canonical JSON of the whole session.
    pub fn transcript(&self) -> String {
        serde_json::to_string(self).expect("session serializes")
    }
}

fn ask(
    backend: &dyn ExpertBackend,
    expert: &Expert,
    scenario: &str,
    scenario_id: Option<&str>,
    round: usize,
    feedback: Option<&RoundFeedback>,
    config: &DelphiConfig,
) -> Result<f64, DroppedExpert> {
    let mut reason = String::new();
    for attempt in 0..=MAX_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(&[config.seed, expert.index as u64, round as u64, u64::from(attempt)]));
        let request = ExpertRequest {
            expert: expert.index,
            role: &expert.role,
            scenario,
            scenario_id,
            round,
            attempt,
            prior_round: feedback,
            temperature: config.temperature_hint,
        };
        match backend.submit(&request, &mut rng) {
            Ok(v) if (0.0..=1.0).contains(&v) => return Ok(v),
            Ok(v) => reason = format!("response {v} outside [0, 1]"),
            Err(e) => reason = e.to_string(),
        }
    }
    Err(DroppedExpert { expert: expert.index, attempts: MAX_RETRIES + 1, reason })
}

pub(crate) fn run(
    scenario: &str,
    scenario_id: Option<&str>,
    panel: &Panel,
    config: &DelphiConfig,
    backend: &dyn ExpertBackend,
) -> Result<DelphiSession, DelphiError> {
    config.validate()?;
    if panel.experts.is_empty() {
        return Err(DelphiError::InvalidInput("panel has no experts".into()));
    }

    let mut rounds: Vec<Round> = Vec::new();
    let mut feedback: Option<RoundFeedback> = None;
    let mut consensus_reached_at = None;

    for index in 1..=config.max_rounds {
        let answers: Vec<Result<f64, DroppedExpert>> = panel
            .experts
            .par_iter()
            .map(|e| ask(backend, e, scenario, scenario_id, index, feedback.as_ref(), config))
            .collect();

        let mut responses = BTreeMap::new();
        let mut dropped = Vec::new();
        for (expert, answer) in panel.experts.iter().zip(answers) {
            match answer {
                Ok(v) => {
                    responses.insert(expert.index, v);
                }
                Err(d) => dropped.push(d),
            }
        }
        if responses.is_empty() {
            return Err(DelphiError::SessionFailed { round: index });
        }

        let values: Vec<f64> = responses.values().copied().collect();
        let mean = super::stats::mean(&values);
        let std = population_std(&values);
        let fb = RoundFeedback::new(index, values, mean, std);
        rounds.push(Round { index, responses, dropped, mean, std, summary_text: fb.text.clone() });
        feedback = Some(fb);

        if std < config.consensus_sigma {
            consensus_reached_at = Some(index);
            break;
        }
    }

    let last = rounds.last().expect("max_rounds >= 1");
    let experts: Vec<usize> = last.responses.keys().copied().collect();
    let values: Vec<f64> = last.responses.values().copied().collect();
    let raw_weights: Vec<f64> = if rounds.len() == 1 {
        vec![1.0; experts.len()]
    } else {
        experts
            .iter()
            .map(|e| {
                let history: Vec<f64> = rounds.iter().filter_map(|r| r.responses.get(e).copied()).collect();
                1.0 / (population_std(&history) + config.weight_epsilon)
            })
            .collect()
    };
    let total: f64 = raw_weights.iter().sum();
    let final_estimate = weighted_mean(&values, &raw_weights);
    let weights = experts.iter().zip(&raw_weights).map(|(&e, w)| (e, w / total)).collect();
    let credible_interval = credible_interval(final_estimate, DEFAULT_PSEUDO_COUNTS, DEFAULT_LEVEL)?;

    Ok(DelphiSession {
        scenario: scenario.to_string(),
        scenario_id: scenario_id.map(String::from),
        backend: backend.name().to_string(),
        panel: panel.clone(),
        config: *config,
        rounds,
        final_estimate,
        credible_interval,
        consensus_reached_at,
        weights,
    })
}

/// Runs rounds until the population std of the answers drops below
/// `consensus_sigma` or `max_rounds` is reached, then aggregates the final
/// round with weights inversely proportional to each expert's spread
/// across rounds.
pub fn run_session(
    scenario: &str,
    panel: &Panel,
    config: &DelphiConfig,
    backend: &dyn ExpertBackend,
) -> Result<DelphiSession, DelphiError> {
    run(scenario, None, panel, config, backend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delphi::{assign_roles, BackendError, ScriptedBackend, SimulatedBackend};

    fn three() -> Panel {
        assign_roles(3, &["A".to_string(), "B".to_string()]).unwrap()
    }

    #[test]
    fn uniform_panel_agrees_at_once() {
        let s = run_session("x", &Panel::default(), &DelphiConfig::default(), &ScriptedBackend::Constant(0.7)).unwrap();
        assert_eq!(s.rounds.len(), 1);
        assert_eq!(s.consensus_reached_at, Some(1));
        assert_eq!(s.final_estimate, 0.7);
        assert_eq!(s.rounds[0].std, 0.0);
        assert!(s.weights.values().all(|&w| (w - 0.02).abs() < 1e-15));
    }

    #[test]
    fn three_expert_weighting() {
        let script = ScriptedBackend::Schedule(BTreeMap::from([
            (0, vec![0.6, 0.6]),
            (1, vec![0.7, 0.8]),
            (2, vec![0.9, 0.7]),
        ]));
        let s = run_session("x", &three(), &DelphiConfig::default(), &script).unwrap();
        assert_eq!(s.rounds.len(), 2);
        assert!((s.rounds[0].std - 0.124_721_912_892_464_7).abs() < 1e-12);
        assert!((s.rounds[1].std - 0.081_649_658_092_772_6).abs() < 1e-12);
        assert_eq!(s.consensus_reached_at, Some(2));
        // 40-digit reference for weights 1/(sigma_i + 1e-6), sigma = (0, 0.05, 0.1).
        assert!((s.final_estimate - 0.600_004_999_760_011_4).abs() < 1e-9);
        assert!((s.weights.values().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(s.rounds[1].summary_text, "Round 2 summary: mean 0.7000, std 0.0816, responses [0.6000, 0.7000, 0.8000]");
    }

    #[test]
    fn stops_at_max_rounds() {
        let script = ScriptedBackend::Schedule(BTreeMap::from([(0, vec![0.0]), (1, vec![1.0])]));
        let cfg = DelphiConfig { max_rounds: 3, ..Default::default() };
        let s = run_session("x", &assign_roles(2, &["A".into()]).unwrap(), &cfg, &script).unwrap();
        assert_eq!(s.rounds.len(), 3);
        assert_eq!(s.consensus_reached_at, None);
        assert_eq!(s.final_estimate, 0.5);
    }

    struct Flaky;
    impl ExpertBackend for Flaky {
        fn name(&self) -> &'static str {
            "flaky"
        }
        fn submit(&self, r: &ExpertRequest<'_>, _: &mut ChaCha8Rng) -> Result<f64, BackendError> {
            match r.expert {
                0 => Ok(if r.attempt < 2 { 1.5 } else { 0.4 }),
                1 => Ok(-0.1),
                _ => Err(BackendError::Transport("down".into())),
            }
        }
    }

    #[test]
    fn retries_then_drops() {
        let s = run_session("x", &three(), &DelphiConfig::default(), &Flaky).unwrap();
        let r = &s.rounds[0];
        assert_eq!(r.responses, BTreeMap::from([(0, 0.4)]));
        assert_eq!(r.dropped.len(), 2);
        assert_eq!(r.dropped[0].expert, 1);
        assert_eq!(r.dropped[0].attempts, MAX_RETRIES + 1);
        assert!(r.dropped[1].reason.contains("down"));
        assert_eq!(s.final_estimate, 0.4);
    }

    #[test]
    fn all_dropped_fails() {
        let r = run_session("x", &three(), &DelphiConfig::default(), &ScriptedBackend::Constant(2.0));
        assert_eq!(r.unwrap_err(), DelphiError::SessionFailed { round: 1 });
    }

    #[test]
    fn seeded_sessions_are_bit_identical() {
        let b = SimulatedBackend::new(0.5, 0.2);
        let cfg = DelphiConfig { seed: 42, ..Default::default() };
        let a = run_session("x", &Panel::default(), &cfg, &b).unwrap();
        let again = run_session("x", &Panel::default(), &cfg, &b).unwrap();
        assert_eq!(a.transcript(), again.transcript());
        let other = run_session("x", &Panel::default(), &DelphiConfig { seed: 43, ..cfg }, &b).unwrap();
        assert_ne!(a.transcript(), other.transcript());
    }

    #[test]
    fn simulated_centre_recovered() {
        let b = SimulatedBackend::new(0.71, 0.02);
        for seed in 0..100 {
            let s = run_session("x", &Panel::default(), &DelphiConfig { seed, ..Default::default() }, &b).unwrap();
            assert_eq!(s.consensus_reached_at, Some(1));
            assert!((s.final_estimate - 0.71).abs() <= 0.02, "seed {seed}: {}", s.final_estimate);
        }
    }
}
