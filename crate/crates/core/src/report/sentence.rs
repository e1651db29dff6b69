use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::UNSUPPORTED_STAMP;
use crate::argument::{ArgumentGraph, DefeaterStatus, DoubtCategory};
use crate::confidence::ConfidenceValuation;
use crate::soundness::{evaluate_validity, ValidityState};

pub const NOT_PROVIDED: &str = "[NOT PROVIDED]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Clause {
    pub key: &'static str,
    pub stem: &'static str,
}

/// Statement clauses in template order. Judgements are keyed by `key`.
pub const CLAUSES: [Clause; 8] = [
    Clause { key: "sound_and_valid", stem: "I believe my judgement of this case is sound and valid because" },
    Clause { key: "context", stem: "I understand the context and criticality of the decision:" },
    Clause { key: "system", stem: "I understand the system:" },
    Clause { key: "reasoning", stem: "I find a clear thread of reasoning from evidence to claim:" },
    Clause { key: "evidence", stem: "Evidence provided is sufficient/insufficient for evidence-based decision making:" },
    Clause { key: "doubts", stem: "I have actively explored doubts:" },
    Clause { key: "disproving_evidence", stem: "I have also identified what evidence would be capable of disproving the claim:" },
    Clause { key: "biases", stem: "I have considered and addressed biases and fallacies:" },
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentencingStatement {
    pub text: String,
    /// Clause keys filled with the placeholder.
    pub missing: Vec<&'static str>,
    /// Judgement keys that match no clause.
    pub unknown: Vec<String>,
    pub defeaters_by_status: BTreeMap<DefeaterStatus, usize>,
    pub residual_doubts_by_category: BTreeMap<DoubtCategory, usize>,
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

/// Fills the statement template with the evaluator's judgements and
/// appends defeater and residual-doubt counts from the case.
pub fn sentencing_statement(
    graph: &ArgumentGraph,
    valuation: &ConfidenceValuation<f64>,
    judgements: &BTreeMap<String, String>,
) -> SentencingStatement {
    let top = graph.top_claim();
    let mut text = format!(
        "Sentencing statement for case {} ({}).\nTop claim {}: \"{}\"\n\n",
        graph.meta().id,
        graph.meta().title,
        top.id,
        top.statement
    );

    let mut missing = Vec::new();
    for (i, clause) in CLAUSES.iter().enumerate() {
        let body = judgements.get(clause.key).map(|s| s.trim()).filter(|s| !s.is_empty());
        let body = body.unwrap_or_else(|| {
            missing.push(clause.key);
            NOT_PROVIDED
        });
        let _ = writeln!(text, "{}. {} {}", i + 1, clause.stem, body);
    }
    let unknown: Vec<String> =
        judgements.keys().filter(|k| !CLAUSES.iter().any(|c| c.key == k.as_str())).cloned().collect();

    let mut defeaters_by_status: BTreeMap<DefeaterStatus, usize> =
        [DefeaterStatus::Unresolved, DefeaterStatus::Sustained, DefeaterStatus::Refuted].into_iter().map(|s| (s, 0)).collect();
    for d in graph.defeaters() {
        *defeaters_by_status.entry(d.status).or_default() += 1;
    }
    let mut residual_doubts_by_category: BTreeMap<DoubtCategory, usize> =
        DoubtCategory::ALL.into_iter().map(|c| (c, 0)).collect();
    for r in graph.residual_doubts() {
        *residual_doubts_by_category.entry(r.category).or_default() += 1;
    }

    text.push('\n');
    if let Some(value) = valuation.value(&top.id) {
        let _ = writeln!(
            text,
            "Quantified confidence in the top claim: {value:.2} ({}); residual doubt {:.2}.",
            valuation.method.label(),
            1.0 - value
        );
    }
    if evaluate_validity(graph).state(&top.id) != Some(ValidityState::Supported) {
        let _ = writeln!(text, "{UNSUPPORTED_STAMP}.");
    }
    let _ = writeln!(
        text,
        "Defeaters: {}, {}, {}.",
        plural(defeaters_by_status[&DefeaterStatus::Unresolved], "unresolved defeater"),
        plural(defeaters_by_status[&DefeaterStatus::Sustained], "sustained defeater"),
        plural(defeaters_by_status[&DefeaterStatus::Refuted], "refuted defeater"),
    );
    let by_category: Vec<String> =
        residual_doubts_by_category.iter().map(|(c, n)| format!("{} {n}", c.as_str())).collect();
    let accepted = graph.residual_doubts().iter().filter(|r| r.accepted).count();
    let _ = writeln!(text, "Residual doubts: {} ({accepted} accepted).", by_category.join(", "));
    if !missing.is_empty() {
        let _ = writeln!(text, "Flagged: {} not provided ({}).", plural(missing.len(), "clause"), missing.join(", "));
    }

    SentencingStatement { text, missing, unknown, defeaters_by_status, residual_doubts_by_category }
}
