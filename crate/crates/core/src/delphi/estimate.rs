use std::path::Path;

use serde::{Deserialize, Serialize};

use super::session::{run, DelphiSession};
use super::stats::{calibration, format_percent_pm, mean, population_std};
use super::{DelphiConfig, DelphiError, ExpertBackend, Panel};

/// Spread of final estimates over repeated sessions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefeaterEstimate {
    pub runs: Vec<f64>,
    pub mean: f64,
    /// Population std across runs.
    pub std: f64,
    pub display: String,
}

/// Repeats the session `runs` times with independent seed streams. A
/// failed run aborts and returns the completed estimates in the error.
pub fn estimate_defeater_probability(
    scenario: &str,
    runs: usize,
    panel: &Panel,
    config: &DelphiConfig,
    backend: &dyn ExpertBackend,
) -> Result<DefeaterEstimate, DelphiError> {
    if runs < 2 {
        return Err(DelphiError::InvalidInput(format!("need at least 2 runs, got {runs}")));
    }
    let mut estimates = Vec::with_capacity(runs);
    for r in 0..runs {
        match run(scenario, None, panel, &config.for_run(r as u64), backend) {
            Ok(s) => estimates.push(s.final_estimate),
            Err(e) => return Err(DelphiError::Aborted { completed: estimates, source: Box::new(e) }),
        }
    }
    let m = mean(&estimates);
    let sd = population_std(&estimates);
    Ok(DefeaterEstimate { display: format_percent_pm(m, sd), runs: estimates, mean: m, std: sd })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    No,
    Yes,
    Unresolved,
}

impl Outcome {
    pub fn as_binary(self) -> Option<u8> {
        match self {
            Outcome::No => Some(0),
            Outcome::Yes => Some(1),
            Outcome::Unresolved => None,
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.as_binary() {
            Some(b) => s.serialize_u8(b),
            None => s.serialize_str("unresolved"),
        }
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) if n.as_u64() == Some(0) => Ok(Outcome::No),
            serde_json::Value::Number(n) if n.as_u64() == Some(1) => Ok(Outcome::Yes),
            serde_json::Value::String(s) if s == "unresolved" => Ok(Outcome::Unresolved),
            other => Err(serde::de::Error::custom(format!("outcome must be 0, 1 or \"unresolved\", got {other}"))),
        }
    }
}

/// A forecasting question with a reference aggregate and its resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub description: String,
    #[serde(default)]
    pub resolution_date: Option<String>,
    pub reference_estimate: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenarios {
    pub scenarios: Vec<Scenario>,
    pub warnings: Vec<String>,
}

/// Parses a scenarios file, skipping malformed entries with a warning.
pub fn load_scenarios(text: &str) -> Result<LoadedScenarios, DelphiError> {
    if text.trim().is_empty() {
        return Err(DelphiError::Scenarios("file is empty".into()));
    }
    let entries: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| DelphiError::Scenarios(format!("expected a JSON list: {e}")))?;
    if entries.is_empty() {
        return Err(DelphiError::Scenarios("no scenarios listed".into()));
    }
    let mut scenarios = Vec::new();
    let mut warnings = Vec::new();
    for (i, entry) in entries.into_iter().enumerate() {
        match serde_json::from_value::<Scenario>(entry) {
            Ok(s) if (0.0..=1.0).contains(&s.reference_estimate) => scenarios.push(s),
            Ok(s) => warnings.push(format!("entry {i} ({}) skipped: reference_estimate outside [0, 1]", s.id)),
            Err(e) => warnings.push(format!("entry {i} skipped: {e}")),
        }
    }
    if scenarios.is_empty() {
        return Err(DelphiError::Scenarios("no valid scenarios".into()));
    }
    Ok(LoadedScenarios { scenarios, warnings })
}

/// Session for one scenario; scripted backends can key on its id.
pub fn run_scenario(
    scenario: &Scenario,
    panel: &Panel,
    config: &DelphiConfig,
    backend: &dyn ExpertBackend,
) -> Result<DelphiSession, DelphiError> {
    run(&scenario.description, Some(&scenario.id), panel, config, backend)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub id: String,
    pub estimate: f64,
    pub credible_interval: (f64, f64),
    pub reference_estimate: f64,
    pub outcome: Outcome,
    pub consensus_reached_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub per_scenario: Vec<ScenarioResult>,
    pub calibration_metric: &'static str,
    /// Over resolved scenarios; `None` if none resolved.
    pub calibration_ours: Option<f64>,
    pub calibration_reference: Option<f64>,
    pub resolved: usize,
    pub warnings: Vec<String>,
}

/// Runs a session per scenario and scores both the panel and the
/// reference aggregate against resolved outcomes.
pub fn benchmark(
    scenarios_json: &str,
    panel: &Panel,
    config: &DelphiConfig,
    backend: &dyn ExpertBackend,
) -> Result<BenchmarkReport, DelphiError> {
    let LoadedScenarios { scenarios, mut warnings } = load_scenarios(scenarios_json)?;
    let mut per_scenario = Vec::new();
    for (i, sc) in scenarios.iter().enumerate() {
        match run_scenario(sc, panel, &config.for_run(i as u64), backend) {
            Ok(s) => per_scenario.push(ScenarioResult {
                id: sc.id.clone(),
                estimate: s.final_estimate,
                credible_interval: s.credible_interval,
                reference_estimate: sc.reference_estimate,
                outcome: sc.outcome,
                consensus_reached_at: s.consensus_reached_at,
            }),
            Err(e) => warnings.push(format!("scenario {} skipped: {e}", sc.id)),
        }
    }
    let resolved: Vec<(&ScenarioResult, u8)> =
        per_scenario.iter().filter_map(|r| r.outcome.as_binary().map(|o| (r, o))).collect();
    let outcomes: Vec<u8> = resolved.iter().map(|(_, o)| *o).collect();
    let score = |f: fn(&ScenarioResult) -> f64| -> Result<Option<f64>, DelphiError> {
        if resolved.is_empty() {
            return Ok(None);
        }
        let preds: Vec<f64> = resolved.iter().map(|(r, _)| f(r)).collect();
        calibration(&preds, &outcomes).map(Some)
    };
    Ok(BenchmarkReport {
        calibration_ours: score(|r| r.estimate)?,
        calibration_reference: score(|r| r.reference_estimate)?,
        resolved: resolved.len(),
        calibration_metric: "brier",
        per_scenario,
        warnings,
    })
}

pub fn run_benchmark(
    scenarios_file: &Path,
    panel: &Panel,
    config: &DelphiConfig,
    backend: &dyn ExpertBackend,
) -> Result<BenchmarkReport, DelphiError> {
    let text = std::fs::read_to_string(scenarios_file)
        .map_err(|e| DelphiError::Scenarios(format!("{}: {e}", scenarios_file.display())))?;
    benchmark(&text, panel, config, backend)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::bundled::SCENARIOS_FIXTURE;
    use crate::delphi::{assign_roles, ScriptedBackend, SimulatedBackend};

    fn small() -> Panel {
        assign_roles(5, &["A".to_string()]).unwrap()
    }

    #[test]
    fn repeated_runs() {
        let b = SimulatedBackend::new(0.71, 0.02);
        let e = estimate_defeater_probability("x", 10, &Panel::default(), &DelphiConfig::default(), &b).unwrap();
        assert_eq!(e.runs.len(), 10);
        assert!((e.mean - 0.71).abs() <= 0.02);
        assert!(e.std < 0.02);

        let flat = SimulatedBackend::new(0.71, 0.0);
        let e = estimate_defeater_probability("x", 10, &small(), &DelphiConfig::default(), &flat).unwrap();
        assert!((e.mean - 0.71).abs() < 1e-12);
        assert!(e.std < 1e-12);
        assert_eq!(e.display, "71% ± 0%");

        assert!(estimate_defeater_probability("x", 1, &small(), &DelphiConfig::default(), &flat).is_err());
    }

    #[test]
    fn failed_run_keeps_partial_results() {
        let r = estimate_defeater_probability("x", 3, &small(), &DelphiConfig::default(), &ScriptedBackend::Constant(7.0));
        match r.unwrap_err() {
            DelphiError::Aborted { completed, source } => {
                assert!(completed.is_empty());
                assert_eq!(*source, DelphiError::SessionFailed { round: 1 });
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn fixture_loads() {
        let l = load_scenarios(SCENARIOS_FIXTURE).unwrap();
        assert_eq!(l.scenarios.len(), 3);
        assert_eq!(l.scenarios[2].outcome, Outcome::Unresolved);
        assert!(l.warnings.is_empty());
    }

    #[test]
    fn malformed_entries_are_skipped() {
        let text = r#"[
            {"id": "ok", "description": "d", "reference_estimate": 0.5, "outcome": 1},
            {"id": "bad-outcome", "description": "d", "reference_estimate": 0.5, "outcome": 3},
            {"id": "bad-ref", "description": "d", "reference_estimate": 1.5, "outcome": 0},
            {"description": "no id", "reference_estimate": 0.5, "outcome": 0}
        ]"#;
        let l = load_scenarios(text).unwrap();
        assert_eq!(l.scenarios.len(), 1);
        assert_eq!(l.warnings.len(), 3);
        assert!(load_scenarios("").is_err());
        assert!(load_scenarios("[]").is_err());
        assert!(load_scenarios("{}").is_err());
    }

    #[test]
    fn benchmark_brier_scores() {
        let b = ScriptedBackend::ByScenario(BTreeMap::from([
            ("S1".to_string(), 0.6),
            ("S2".to_string(), 0.4),
            ("S3".to_string(), 0.3),
        ]));
        let r = benchmark(SCENARIOS_FIXTURE, &small(), &DelphiConfig::default(), &b).unwrap();
        assert_eq!(r.per_scenario.len(), 3);
        assert_eq!(r.resolved, 2);
        assert!((r.calibration_ours.unwrap() - 0.16).abs() < 1e-12);
        assert!((r.calibration_reference.unwrap() - 0.01).abs() < 1e-12);

        let perfect = ScriptedBackend::ByScenario(BTreeMap::from([
            ("S1".to_string(), 1.0),
            ("S2".to_string(), 0.0),
            ("S3".to_string(), 0.5),
        ]));
        let r = benchmark(SCENARIOS_FIXTURE, &small(), &DelphiConfig::default(), &perfect).unwrap();
        assert_eq!(r.calibration_ours, Some(0.0));
    }

    #[test]
    fn benchmark_from_missing_file() {
        let r = run_benchmark(Path::new("/nonexistent/scenarios.json"), &small(), &DelphiConfig::default(), &ScriptedBackend::Constant(0.5));
        assert!(matches!(r, Err(DelphiError::Scenarios(_))));
    }
}
