use std::collections::BTreeMap;

use serde::Serialize;

use super::{eells, keynes, propagate, AppliedAdjustment, ConfidenceError, Method, PropagationOptions, KEYNES_LOG_BASE};
use crate::argument::{ArgumentGraph, NodeId};
use crate::soundness::{evaluate_validity, ValidityState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightOfEvidence {
    pub prior: f64,
    pub posterior: f64,
    pub keynes: f64,
    pub eells: f64,
}

/// The machine-readable valuation written next to a case: per-node values,
/// pre-clamp values and flags for nodes whose validity makes their
/// probability meaningless.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValuationReport {
    pub method: Method,
    pub per_node: BTreeMap<NodeId, f64>,
    pub raw_per_node: BTreeMap<NodeId, f64>,
    /// Claims that are not SUPPORTED. Their values are still computed for
    /// what-if exploration.
    pub flags: BTreeMap<NodeId, ValidityState>,
    pub adjustments_applied: Vec<AppliedAdjustment>,
    pub warnings: Vec<String>,
    pub keynes_log_base: u32,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub weight_of_evidence: BTreeMap<NodeId, WeightOfEvidence>,
}

/// Propagates the case's own assignments and annotates the result.
pub fn valuation_report(
    graph: &ArgumentGraph,
    method: Method,
    options: &PropagationOptions,
) -> Result<ValuationReport, ConfidenceError> {
    let assign = graph.assignments();
    let valuation = propagate(graph, assign, method, options)?;
    let validity = evaluate_validity(graph);
    let flags = valuation
        .per_node
        .keys()
        .filter_map(|n| match validity.state(n) {
            Some(ValidityState::Supported) | None => None,
            Some(s) => Some((n.clone(), s)),
        })
        .collect();

    let mut warnings = valuation.warnings;
    let mut weight_of_evidence = BTreeMap::new();
    for (node, &prior) in &assign.prior {
        let Some(&posterior) = assign.posterior.get(node) else {
            continue;
        };
        match keynes(prior, posterior) {
            Ok(k) => {
                weight_of_evidence.insert(
                    node.clone(),
                    WeightOfEvidence { prior, posterior, keynes: k, eells: eells(prior, posterior) },
                );
            }
            Err(e) => warnings.push(format!("{node}: {e}")),
        }
    }

    Ok(ValuationReport {
        method,
        per_node: valuation.per_node,
        raw_per_node: valuation.raw_per_node,
        flags,
        adjustments_applied: valuation.adjustments_applied,
        warnings,
        keynes_log_base: KEYNES_LOG_BASE,
        weight_of_evidence,
    })
}
