//! CAE argument graphs: the case document schema, graph construction and
//! structural linting.
//!
//! A case is a tree of claims. Each claim is supported by at most one
//! argument block; blocks are decompositions (claim into sub-claims),
//! substitutions (claim into a more assessable claim) or evidence
//! incorporations (claim grounded in one evidence item). Blocks may carry a
//! warrant, a side-claim that licenses the inference. Defeaters attach to any
//! node and record the doubts raised against it.

mod document;
mod error;
mod graph;
mod lint;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use document::{CaseDocument, CaseMeta};
pub use error::CaseError;
pub use graph::{build_graph, ArgumentGraph, NodeRole};
pub use lint::{structural_lint, Finding, FindingKind, Severity as FindingSeverity};

/// Identifier of any node in a case: claim, evidence, block, defeater or
/// residual doubt. Non-empty, no whitespace.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Result<Self, CaseError> {
        let id = id.into();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(CaseError::InvalidId { id });
        }
        Ok(NodeId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for NodeId {
    type Error = CaseError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        NodeId::new(value)
    }
}

impl TryFrom<&str> for NodeId {
    type Error = CaseError;

    fn try_from(value: &str) -> Result<Self, Self::Error> {
        NodeId::new(value)
    }
}

impl From<NodeId> for String {
    fn from(id: NodeId) -> String {
        id.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.0)
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl std::borrow::Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Shorthand for building ids from literals known to be valid.
///
/// Panics on an invalid id.
pub fn id(s: &str) -> NodeId {
    NodeId::new(s).unwrap_or_else(|e| panic!("{e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: NodeId,
    pub statement: String,
    #[serde(default)]
    pub is_top_level: bool,
    /// A warrant: the side-claim licensing one block's inference.
    #[serde(default)]
    pub is_side_claim: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub id: NodeId,
    pub description: String,
    /// Source and method of collection.
    #[serde(default)]
    pub provenance: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Decomposition,
    Substitution,
    EvidenceIncorporation,
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockKind::Decomposition => "decomposition",
            BlockKind::Substitution => "substitution",
            BlockKind::EvidenceIncorporation => "evidence_incorporation",
        })
    }
}

/// Manual adjustment of one block's propagated value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationAdjustment {
    /// Multiplier applied to the block formula before clamping.
    #[serde(default = "unit_factor")]
    pub factor_f: f64,
    /// Replaces the computed value of the parent claim; `factor_f` is then
    /// ignored.
    #[serde(default, rename = "override", skip_serializing_if = "Option::is_none")]
    pub override_value: Option<f64>,
}

fn unit_factor() -> f64 {
    1.0
}

impl Default for PropagationAdjustment {
    fn default() -> Self {
        PropagationAdjustment { factor_f: 1.0, override_value: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentBlock {
    pub id: NodeId,
    pub kind: BlockKind,
    pub parent_claim: NodeId,
    pub children: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warrant: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjustment: Option<PropagationAdjustment>,
    /// Free-text annotation, not interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefeaterType {
    /// Attacks a claim directly.
    Rebutting,
    /// Attacks evidence.
    Undermining,
    /// Attacks the inference from premises to claim.
    Undercutting,
}

impl fmt::Display for DefeaterType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefeaterType::Rebutting => "rebutting",
            DefeaterType::Undermining => "undermining",
            DefeaterType::Undercutting => "undercutting",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefeaterClass {
    /// If sustained, the target becomes unsupported.
    Exploratory,
    /// If sustained, the target becomes false.
    Exact,
}

impl fmt::Display for DefeaterClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefeaterClass::Exploratory => "exploratory",
            DefeaterClass::Exact => "exact",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefeaterStatus {
    Unresolved,
    Sustained,
    Refuted,
}

impl fmt::Display for DefeaterStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefeaterStatus::Unresolved => "unresolved",
            DefeaterStatus::Sustained => "sustained",
            DefeaterStatus::Refuted => "refuted",
        })
    }
}

/// Where a defeater was raised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DefeaterProvenance {
    #[default]
    TeamInternal,
    OrgInternal,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defeater {
    pub id: NodeId,
    pub text: String,
    pub target: NodeId,
    pub defeater_type: DefeaterType,
    pub class: DefeaterClass,
    #[serde(default = "unresolved")]
    pub status: DefeaterStatus,
    #[serde(default)]
    pub provenance: DefeaterProvenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_sustain_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effort: Option<f64>,
    /// Analyst-supplied leaf values the case would have if this defeater
    /// were refuted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refuted_posterior: Option<BTreeMap<NodeId, f64>>,
    #[serde(default)]
    pub requires_restructuring: bool,
    #[serde(default)]
    pub challenges_reasoning_step: bool,
}

fn unresolved() -> DefeaterStatus {
    DefeaterStatus::Unresolved
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoubtCategory {
    Deductiveness,
    Evidential,
    Interior,
    Contextual,
}

impl DoubtCategory {
    pub const ALL: [DoubtCategory; 4] = [
        DoubtCategory::Deductiveness,
        DoubtCategory::Evidential,
        DoubtCategory::Interior,
        DoubtCategory::Contextual,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DoubtCategory::Deductiveness => "deductiveness",
            DoubtCategory::Evidential => "evidential",
            DoubtCategory::Interior => "interior",
            DoubtCategory::Contextual => "contextual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoubtSeverity {
    Minor,
    Significant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikelihoodBand {
    Remote,
    Unlikely,
    Possible,
    Likely,
    AlmostCertain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Likelihood {
    Probability(f64),
    Band(LikelihoodBand),
}

/// An accepted (or pending) doubt with its risk record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualDoubt {
    pub id: NodeId,
    pub category: DoubtCategory,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<DoubtSeverity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub likelihood: Option<Likelihood>,
    #[serde(default)]
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance_rationale: Option<String>,
}
