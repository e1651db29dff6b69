use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cae_core::argument::{FindingSeverity, NodeRole};
use cae_core::confidence::{uniform_required_confidence, valuation_report, LeafAssignments};
use cae_core::defeaters::{checklist, checklist_categories, prioritise, sensitivity, PrioritisationWeights};
use cae_core::delphi::{
    assign_roles, benchmark, default_roles, estimate_defeater_probability, load_scenarios, run_scenario, run_session,
    BackendSpec, DelphiConfig, DelphiSession, ExpertBackend, Scenario, ScriptedBackend, SimulatedBackend,
};
use cae_core::report::{sentencing_statement, visual_summary, SummaryAxes};
use cae_core::{
    evaluate_validity, propagate, structural_lint, whatif, ArgumentGraph, BigRational, Method, PropagationOptions,
    Valuation,
};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::args::{BackendArgs, BackendKind, DefeatersCommand, DelphiCommand, Format, ReportCommand};

/// A failed command. Usage errors exit 2, everything else 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

fn domain(e: impl ToString) -> CliError {
    CliError::Domain(e.to_string())
}

/// What a command printed, and whether it found problems (exit 1).
#[derive(Debug)]
pub struct Output {
    pub stdout: String,
    pub failed: bool,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { stdout, failed: false }
    }
}

type CmdResult = Result<Output, CliError>;

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce(&T) -> String) -> CmdResult {
    Ok(Output::ok(match format {
        Format::Json => serde_json::to_string(value).expect("command output serializes") + "\n",
        Format::Text => text(value),
    }))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Domain(format!("reading {}: {e}", path.display())))
}

pub fn load_case(path: &Path) -> Result<ArgumentGraph, CliError> {
    ArgumentGraph::from_json(&read(path)?).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn options(allow_missing_warrant: bool) -> PropagationOptions {
    PropagationOptions { allow_missing_warrant, ..PropagationOptions::default() }
}

pub fn validate(format: Format, path: &Path) -> CmdResult {
    let g = load_case(path)?;
    let findings: Vec<_> = structural_lint(&g).into_iter().collect();
    let errors = findings.iter().filter(|f| f.severity == FindingSeverity::Error).count();
    let value = json!({
        "id": g.meta().id,
        "valid": errors == 0,
        "claims": g.claims().len(),
        "evidence": g.evidence().len(),
        "blocks": g.blocks().len(),
        "defeaters": g.defeaters().len(),
        "findings": findings,
    });
    let mut out = emit(format, &value, |_| {
        let mut s = format!(
            "{}: {} claims, {} evidence, {} blocks, {} defeaters\n",
            g.meta().id,
            g.claims().len(),
            g.evidence().len(),
            g.blocks().len(),
            g.defeaters().len()
        );
        for f in &findings {
            let _ = writeln!(s, "{f}");
        }
        let _ = writeln!(s, "{}", if errors == 0 { "ok" } else { "structural errors found" });
        s
    })?;
    out.failed = errors > 0;
    Ok(out)
}

pub fn soundness(format: Format, path: &Path) -> CmdResult {
    let g = load_case(path)?;
    let validity = evaluate_validity(&g);
    let top = &g.top_claim().id;
    let value = json!({ "id": g.meta().id, "top_claim": top, "top_state": validity.state(top), "validity": validity });
    emit(format, &value, |_| {
        let mut s = String::new();
        for (id, role) in g.node_ids() {
            if !matches!(role, NodeRole::Claim | NodeRole::Evidence | NodeRole::Block) {
                continue;
            }
            let Some(v) = validity.get(id) else { continue };
            let causes: Vec<String> = v.causes.iter().map(ToString::to_string).collect();
            let mut line = format!("{:<12} {:<9} {:<12}", id, role.as_str(), v.state);
            if !causes.is_empty() {
                let _ = write!(line, " ({})", causes.join(", "));
            }
            let _ = writeln!(s, "{}", line.trim_end());
        }
        let _ = writeln!(s, "top claim {top}: {}", validity.state(top).expect("top claim has a state"));
        s
    })
}

fn valuation_table(g: &ArgumentGraph, v: &Valuation) -> String {
    let validity = evaluate_validity(g);
    let mut s = format!("{} ({})\n{:<12} {:>6} {:>6}  validity\n", g.meta().id, v.method.label(), "node", "value", "raw");
    for (node, value) in &v.per_node {
        let raw = v.raw(node).map_or("-".to_string(), |r| format!("{r:.2}"));
        let state = validity.state(node).map_or("-".to_string(), |st| st.to_string());
        let _ = writeln!(s, "{:<12} {:>6.2} {:>6}  {state}", node, value, raw);
    }
    let top = &g.top_claim().id;
    let _ = writeln!(s, "top {top}: {:.2}", v.top(g));
    for a in &v.adjustments_applied {
        let _ = writeln!(s, "adjusted: {}", serde_json::to_string(a).expect("adjustments serialize"));
    }
    for w in &v.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

pub fn propagate_case(format: Format, path: &Path, method: Method, allow_missing_warrant: bool, exact: bool) -> CmdResult {
    let g = load_case(path)?;
    let opts = options(allow_missing_warrant);
    if exact {
        let assign: LeafAssignments<BigRational> = g.assignments().convert().map_err(domain)?;
        let v = propagate(&g, &assign, method, &opts).map_err(domain)?;
        let as_text = |m: &BTreeMap<cae_core::NodeId, BigRational>| -> BTreeMap<String, String> {
            m.iter().map(|(k, q)| (k.to_string(), q.to_string())).collect()
        };
        let value = json!({ "method": method, "per_node": as_text(&v.per_node), "raw_per_node": as_text(&v.raw_per_node) });
        return emit(format, &value, |_| {
            let mut s = format!("{} ({}, exact)\n", g.meta().id, method.label());
            for (node, q) in &v.per_node {
                let _ = writeln!(s, "{:<12} {q}  ({:.6})", node, cae_core::Scalar::as_f64(q));
            }
            s
        });
    }
    match format {
        // Identical bytes to the service's `valuation` field.
        Format::Json => {
            let report = valuation_report(&g, method, &opts).map_err(domain)?;
            emit(format, &report, |_| unreachable!())
        }
        Format::Text => {
            let v = propagate(&g, g.assignments(), method, &opts).map_err(domain)?;
            Ok(Output::ok(valuation_table(&g, &v)))
        }
    }
}

pub fn required_confidence(format: Format, target: f64, n: u32, method: Method) -> CmdResult {
    let required = uniform_required_confidence(target, n, method);
    let value = json!({ "target": target, "n": n, "method": method, "required": required });
    emit(format, &value, |_| {
        format!("{required:.5} per assigned node ({}, target {target}, n {n})\n", method.label())
    })
}

pub fn whatif_case(
    format: Format,
    path: &Path,
    set: &[(cae_core::NodeId, f64)],
    method: Method,
    allow_missing_warrant: bool,
) -> CmdResult {
    let g = load_case(path)?;
    let overrides: BTreeMap<_, _> = set.iter().cloned().collect();
    let w = whatif(&g, g.assignments(), method, &overrides, &options(allow_missing_warrant)).map_err(domain)?;
    let value = json!({
        "method": method,
        "baseline_top": w.baseline_top,
        "top": w.top,
        "delta": w.delta_top,
        "raw_delta": w.raw_delta_top,
        "valuation": w.valuation,
    });
    emit(format, &value, |_| {
        let mut s = valuation_table(&g, &w.valuation);
        let _ = writeln!(s, "top {:.2} -> {:.2} ({:+.2})", w.baseline_top, w.top, w.delta_top);
        s
    })
}

pub fn defeaters(format: Format, cmd: &DefeatersCommand) -> CmdResult {
    match cmd {
        DefeatersCommand::Prioritise { case, weights, method, sensitivity: grid } => {
            let g = load_case(case)?;
            let opts = PropagationOptions::default();
            let plan = prioritise(&g, g.assignments(), method.method, weights, &opts).map_err(domain)?;
            if !grid {
                return emit(format, &plan, |p| p.to_string());
            }
            let levels = [0.5, 1.0, 2.0];
            let mut points = Vec::new();
            for wp in levels {
                for wi in levels {
                    for we in levels {
                        points.push(PrioritisationWeights::new(wp, wi, we).expect("grid weights are positive"));
                    }
                }
            }
            // The requested weights anchor the comparison.
            points.insert(0, *weights);
            let rows = sensitivity(&g, g.assignments(), method.method, &points, &opts).map_err(domain)?;
            let value = json!({ "plan": plan, "sensitivity": rows });
            emit(format, &value, |_| {
                let mut s = plan.to_string();
                let _ = writeln!(s, "\nsensitivity (order against wp={} wi={} we={}):", weights.w_probability, weights.w_impact, weights.w_effort);
                for r in &rows[1..] {
                    let order: Vec<String> = r.order.iter().map(ToString::to_string).collect();
                    let _ = writeln!(
                        s,
                        "  wp={:<3} wi={:<3} we={:<3} {}{}",
                        r.weights.w_probability,
                        r.weights.w_impact,
                        r.weights.w_effort,
                        order.join(" > "),
                        if r.order_changed { "  (changed)" } else { "" }
                    );
                }
                s
            })
        }
        DefeatersCommand::Checklist { category } => {
            let items = checklist(category.as_deref());
            if items.is_empty() {
                return Err(CliError::Domain(format!(
                    "unknown category {:?}; categories: {}",
                    category.as_deref().unwrap_or_default(),
                    checklist_categories().join(", ")
                )));
            }
            emit(format, &items, |items| {
                let mut s = String::new();
                let mut current = "";
                for it in items {
                    if it.category != current {
                        current = &it.category;
                        let _ = writeln!(s, "{}{current}", if s.is_empty() { "" } else { "\n" });
                    }
                    let _ = writeln!(s, "  {}: {}", it.name, it.prompt);
                    let _ = writeln!(s, "    e.g. {}", it.example);
                }
                s
            })
        }
    }
}

fn config(b: &BackendArgs) -> Result<DelphiConfig, CliError> {
    let config = DelphiConfig { seed: b.seed, max_rounds: b.max_rounds, ..DelphiConfig::default() };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

/// `references` maps scenario ids to reference estimates, used by the
/// scripted backend when no script is given.
fn backend(b: &BackendArgs, references: &BTreeMap<String, f64>) -> Result<Box<dyn ExpertBackend>, CliError> {
    let spec = match b.backend {
        BackendKind::Scripted => {
            let script = match &b.script {
                Some(p) => serde_json::from_str::<ScriptedBackend>(&read(p)?)
                    .map_err(|e| CliError::Domain(format!("{}: {e}", p.display())))?,
                None if !references.is_empty() => ScriptedBackend::ByScenario(references.clone()),
                None => return Err(CliError::Usage("the scripted backend needs --script or scenarios with reference estimates".into())),
            };
            BackendSpec::Scripted { script }
        }
        BackendKind::Simulated => {
            let centre = match (b.centre, references.len()) {
                (Some(c), _) => c,
                (None, 1) => *references.values().next().expect("one reference"),
                (None, _) => return Err(CliError::Usage("the simulated backend needs --centre".into())),
            };
            BackendSpec::Simulated(SimulatedBackend::new(centre, b.noise))
        }
        BackendKind::Remote => BackendSpec::Remote { endpoint: b.endpoint.clone() },
    };
    spec.build().map_err(domain)
}

/// A scenario file holds either a JSON scenario object or the question as
/// plain text.
fn read_scenario(path: &Path) -> Result<(String, Option<Scenario>), CliError> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        let s: Scenario = serde_json::from_str(&text).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
        return Ok((s.description.clone(), Some(s)));
    }
    let question = text.trim().to_string();
    if question.is_empty() {
        return Err(CliError::Domain(format!("{}: empty scenario", path.display())));
    }
    Ok((question, None))
}

fn session_text(s: &DelphiSession) -> String {
    let mut out = String::new();
    for r in &s.rounds {
        let _ = writeln!(out, "{}", r.summary_text);
        if !r.dropped.is_empty() {
            let _ = writeln!(out, "  dropped {} expert(s)", r.dropped.len());
        }
    }
    let _ = writeln!(
        out,
        "final estimate {:.4}, 95% interval [{:.4}, {:.4}], {}",
        s.final_estimate,
        s.credible_interval.0,
        s.credible_interval.1,
        match s.consensus_reached_at {
            Some(r) => format!("consensus at round {r}"),
            None => "no consensus".to_string(),
        }
    );
    out
}

pub fn delphi(format: Format, cmd: &DelphiCommand) -> CmdResult {
    match cmd {
        DelphiCommand::Run { scenario, backend: b, runs, transcript } => {
            let (question, parsed) = read_scenario(scenario)?;
            let references: BTreeMap<String, f64> =
                parsed.iter().map(|s| (s.id.clone(), s.reference_estimate)).collect();
            let config = config(b)?;
            let panel = assign_roles(b.experts, &default_roles()).map_err(|e| CliError::Usage(e.to_string()))?;
            let backend = backend(b, &references)?;
            if *runs >= 2 {
                if transcript.is_some() {
                    return Err(CliError::Usage("--transcript applies to a single run".into()));
                }
                let e = estimate_defeater_probability(&question, *runs as usize, &panel, &config, backend.as_ref())
                    .map_err(domain)?;
                return emit(format, &e, |e| {
                    let runs: Vec<String> = e.runs.iter().map(|r| format!("{r:.4}")).collect();
                    format!("runs: {}\nestimate: {}\n", runs.join(", "), e.display)
                });
            }
            let session = match &parsed {
                Some(s) => run_scenario(s, &panel, &config, backend.as_ref()),
                None => run_session(&question, &panel, &config, backend.as_ref()),
            }
            .map_err(domain)?;
            if let Some(path) = transcript {
                fs::write(path, session.transcript()).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
            }
            emit(format, &session, session_text)
        }
        DelphiCommand::Bench { scenarios, backend: b } => {
            let text = read(scenarios)?;
            let loaded = load_scenarios(&text).map_err(domain)?;
            let references = loaded.scenarios.iter().map(|s| (s.id.clone(), s.reference_estimate)).collect();
            let config = config(b)?;
            let panel = assign_roles(b.experts, &default_roles()).map_err(|e| CliError::Usage(e.to_string()))?;
            let backend = backend(b, &references)?;
            let report = benchmark(&text, &panel, &config, backend.as_ref()).map_err(domain)?;
            emit(format, &report, |r| {
                let mut s = format!("{:<10} {:>8} {:>10}  outcome\n", "scenario", "ours", "reference");
                for p in &r.per_scenario {
                    let outcome = serde_json::to_string(&p.outcome).expect("outcomes serialize");
                    let _ = writeln!(s, "{:<10} {:>8.4} {:>10.4}  {outcome}", p.id, p.estimate, p.reference_estimate);
                }
                let score = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.4}"));
                let _ = writeln!(
                    s,
                    "{} score over {} resolved: ours {}, reference {}",
                    r.calibration_metric,
                    r.resolved,
                    score(r.calibration_ours),
                    score(r.calibration_reference)
                );
                for w in &r.warnings {
                    let _ = writeln!(s, "warning: {w}");
                }
                s
            })
        }
    }
}

pub fn report(format: Format, cmd: &ReportCommand) -> CmdResult {
    match cmd {
        ReportCommand::Summary { case, method, ev, aq, sa, output } => {
            let axes = SummaryAxes::new(*ev, *aq, *sa).map_err(|e| CliError::Usage(e.to_string()))?;
            let g = load_case(case)?;
            let v = propagate(&g, g.assignments(), method.method, &PropagationOptions::default()).map_err(domain)?;
            let summary = visual_summary(&g, &v, axes).map_err(domain)?;
            if let Some(path) = output {
                fs::write(path, &summary.svg).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
                return emit(format, &summary.record, |_| format!("wrote {}\n", path.display()));
            }
            emit(format, &summary.record, |_| summary.svg.clone())
        }
        ReportCommand::Sentence { case, method, judgements } => {
            let g = load_case(case)?;
            let judgements: BTreeMap<String, String> = match judgements {
                Some(p) => serde_json::from_str(&read(p)?).map_err(|e| CliError::Domain(format!("{}: {e}", p.display())))?,
                None => BTreeMap::new(),
            };
            let v = propagate(&g, g.assignments(), method.method, &PropagationOptions::default()).map_err(domain)?;
            let statement = sentencing_statement(&g, &v, &judgements);
            emit(format, &statement, |s| s.text.clone())
        }
    }
}
