//! Defeater analytics: what refuting a defeater is worth, the order in
//! which to investigate them, and the bundled checklist for finding them.

mod checklist;
mod plan;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::argument::{ArgumentGraph, NodeId};
use crate::confidence::{whatif, ConfidenceError, LeafAssignments, Method, PropagationOptions};

pub use checklist::{checklist, checklist_categories, ChecklistItem};
pub use plan::{
    prioritise, sensitivity, PlanEntry, PrioritisationPlan, ScoredDefeater, SensitivityRow, Unscoreable,
    INDEPENDENCE_ASSUMPTION,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DefeaterError {
    #[error("unknown defeater {0}")]
    UnknownDefeater(NodeId),
    #[error("impact unavailable for {0}: no refuted_posterior supplied")]
    ImpactUnavailable(NodeId),
    #[error("effort must be in (0, 1], got {0}")]
    InvalidEffort(f64),
    #[error("probability must be in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("weights must be strictly positive and finite: {0:?}")]
    InvalidWeights(PrioritisationWeights),
    #[error(transparent)]
    Confidence(#[from] ConfidenceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrioritisationWeights {
    #[serde(default = "one")]
    pub w_probability: f64,
    #[serde(default = "one")]
    pub w_impact: f64,
    #[serde(default = "one")]
    pub w_effort: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PrioritisationWeights {
    fn default() -> Self {
        PrioritisationWeights { w_probability: 1.0, w_impact: 1.0, w_effort: 1.0 }
    }
}

impl PrioritisationWeights {
    pub fn new(w_probability: f64, w_impact: f64, w_effort: f64) -> Result<Self, DefeaterError> {
        let w = PrioritisationWeights { w_probability, w_impact, w_effort };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), DefeaterError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.w_probability) && ok(self.w_impact) && ok(self.w_effort) {
            Ok(())
        } else {
            Err(DefeaterError::InvalidWeights(*self))
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        PrioritisationWeights {
            w_probability: self.w_probability * k,
            w_impact: self.w_impact * k,
            w_effort: self.w_effort * k,
        }
    }
}

/// Change in top-claim confidence if a defeater were refuted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefeaterImpact {
    pub defeater: NodeId,
    pub method: Method,
    pub baseline_top: f64,
    pub refuted_top: f64,
    /// At the reporting precision of the propagation options.
    pub impact: f64,
    pub raw_impact: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Re-propagates with the defeater's `refuted_posterior` substituted and
/// returns the change in top confidence.
pub fn impact_of_refutation(
    graph: &ArgumentGraph,
    assign: &LeafAssignments<f64>,
    method: Method,
    defeater: &NodeId,
    options: &PropagationOptions,
) -> Result<DefeaterImpact, DefeaterError> {
    let d = graph
        .defeater(defeater)
        .ok_or_else(|| DefeaterError::UnknownDefeater(defeater.clone()))?;
    let overrides: &BTreeMap<NodeId, f64> = d
        .refuted_posterior
        .as_ref()
        .ok_or_else(|| DefeaterError::ImpactUnavailable(defeater.clone()))?;
    let w = whatif(graph, assign, method, overrides, options)?;
    let warning = (w.raw_delta_top < 0.0)
        .then(|| format!("refuting {defeater} lowers top confidence by {:.4}", -w.raw_delta_top));
    Ok(DefeaterImpact {
        defeater: defeater.clone(),
        method,
        baseline_top: w.baseline_top,
        refuted_top: w.top,
        impact: w.delta_top,
        raw_impact: w.raw_delta_top,
        warning,
    })
}

/// `(w_p * probability + w_i * impact) / (w_e * effort)`.
pub fn prioritisation_score(
    probability: f64,
    impact: f64,
    effort: f64,
    weights: &PrioritisationWeights,
) -> Result<f64, DefeaterError> {
    weights.validate()?;
    if !(0.0..=1.0).contains(&probability) {
        return Err(DefeaterError::InvalidProbability(probability));
    }
    if !(effort > 0.0 && effort <= 1.0) {
        return Err(DefeaterError::InvalidEffort(effort));
    }
    Ok((weights.w_probability * probability + weights.w_impact * impact) / (weights.w_effort * effort))
}
