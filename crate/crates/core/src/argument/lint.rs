use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{ArgumentGraph, BlockKind, DefeaterType, NodeId, NodeRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    /// A deductive step without the side-claim that closes it.
    DecompositionLacksWarrant,
    SubstitutionLacksWarrant,
    UnsupportedLeaf,
    /// The defeater's type cannot challenge the role of its target, e.g. an
    /// undermining defeater pointed at a claim.
    DefeaterRoleMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub node: NodeId,
    pub kind: FindingKind,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}: {}: {}", self.node, self.message)
    }
}

/// Checks a well-formed graph for structural weaknesses. Never fails and
/// never mutates; the result is a set, so repeated runs agree.
pub fn structural_lint(graph: &ArgumentGraph) -> BTreeSet<Finding> {
    let mut findings = BTreeSet::new();

    for block in graph.blocks() {
        if block.warrant.is_some() {
            continue;
        }
        let kind = match block.kind {
            BlockKind::Decomposition => FindingKind::DecompositionLacksWarrant,
            BlockKind::Substitution => FindingKind::SubstitutionLacksWarrant,
            BlockKind::EvidenceIncorporation => continue,
        };
        findings.insert(Finding {
            severity: Severity::Error,
            node: block.id.clone(),
            kind,
            message: format!("{} lacks warrant", block.kind),
        });
    }

    for claim in graph.claims() {
        if !claim.is_side_claim && graph.support_of(&claim.id).is_none() {
            findings.insert(Finding {
                severity: Severity::Warning,
                node: claim.id.clone(),
                kind: FindingKind::UnsupportedLeaf,
                message: "unsupported leaf: claim has neither a supporting block nor evidence".into(),
            });
        }
    }

    for d in graph.defeaters() {
        let role = graph.role(&d.target).expect("validated target");
        let fits = match d.defeater_type {
            DefeaterType::Rebutting => matches!(role, NodeRole::Claim | NodeRole::SideClaim),
            DefeaterType::Undermining => role == NodeRole::Evidence,
            DefeaterType::Undercutting => matches!(role, NodeRole::Block | NodeRole::SideClaim),
        };
        if !fits {
            findings.insert(Finding {
                severity: Severity::Warning,
                node: d.id.clone(),
                kind: FindingKind::DefeaterRoleMismatch,
                message: format!(
                    "{:?} defeater targets {} ({}), a role it cannot challenge",
                    d.defeater_type,
                    d.target,
                    role.as_str()
                )
                .to_lowercase(),
            });
        }
    }

    findings
}
