//! Logical validity of every node under the current defeater verdicts.
//!
//! A node challenged by an unresolved defeater, or by a sustained
//! exploratory one, is UNSUPPORTED; a sustained exact defeater makes it
//! FALSE. Refuted defeaters have no effect. A node's state flows upward
//! through its block to the parent claim and on to the top claim, each step
//! keeping the most severe state seen.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::argument::{ArgumentGraph, Defeater, DefeaterClass, DefeaterStatus, NodeId, NodeRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ValidityState {
    #[default]
    Supported,
    Unsupported,
    False,
}

impl fmt::Display for ValidityState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ValidityState::Supported => "SUPPORTED",
            ValidityState::Unsupported => "UNSUPPORTED",
            ValidityState::False => "FALSE",
        })
    }
}

/// The state a defeater imposes on its target.
pub fn defeater_effect(d: &Defeater) -> ValidityState {
    match (d.status, d.class) {
        (DefeaterStatus::Refuted, _) => ValidityState::Supported,
        (DefeaterStatus::Unresolved, _) => ValidityState::Unsupported,
        (DefeaterStatus::Sustained, DefeaterClass::Exploratory) => ValidityState::Unsupported,
        (DefeaterStatus::Sustained, DefeaterClass::Exact) => ValidityState::False,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct NodeValidity {
    pub state: ValidityState,
    /// Defeaters whose effect reaches this node.
    pub causes: BTreeSet<NodeId>,
}

/// Validity of every claim, evidence item and block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ValidityMap(BTreeMap<NodeId, NodeValidity>);

impl ValidityMap {
    pub fn state(&self, id: &NodeId) -> Option<ValidityState> {
        self.0.get(id).map(|v| v.state)
    }

    pub fn get(&self, id: &NodeId) -> Option<&NodeValidity> {
        self.0.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, &NodeValidity)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn states(&self) -> BTreeMap<NodeId, ValidityState> {
        self.0.iter().map(|(k, v)| (k.clone(), v.state)).collect()
    }
}

pub fn evaluate_validity(graph: &ArgumentGraph) -> ValidityMap {
    let mut map: BTreeMap<NodeId, NodeValidity> = graph
        .node_ids()
        .filter(|(_, role)| !matches!(role, NodeRole::Defeater | NodeRole::ResidualDoubt))
        .map(|(id, _)| (id.clone(), NodeValidity::default()))
        .collect();

    for d in graph.defeaters() {
        let effect = defeater_effect(d);
        if effect == ValidityState::Supported {
            continue;
        }
        let entry = map.get_mut(&d.target).expect("validated target");
        entry.state = entry.state.max(effect);
        entry.causes.insert(d.id.clone());
    }

    fn absorb(map: &mut BTreeMap<NodeId, NodeValidity>, into: &NodeId, from: &NodeId) {
        let src = map[from].clone();
        let dst = map.get_mut(into).expect("indexed node");
        dst.state = dst.state.max(src.state);
        dst.causes.extend(src.causes);
    }

    for block in graph.blocks_bottom_up() {
        for input in block.children.iter().chain(block.warrant.iter()) {
            absorb(&mut map, &block.id, input);
        }
        absorb(&mut map, &block.parent_claim, &block.id);
    }
    ValidityMap(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Sustained,
    Refuted,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("unknown defeater {0}")]
    UnknownDefeater(NodeId),
    #[error("defeater {id} already resolved as {status}")]
    AlreadyResolved { id: NodeId, status: DefeaterStatus },
}

/// Records a verdict on an unresolved defeater, returning the updated graph.
pub fn resolve_defeater(graph: &ArgumentGraph, defeater: &NodeId, verdict: Verdict) -> Result<ArgumentGraph, ResolveError> {
    let d = graph
        .defeater(defeater)
        .ok_or_else(|| ResolveError::UnknownDefeater(defeater.clone()))?;
    if d.status != DefeaterStatus::Unresolved {
        return Err(ResolveError::AlreadyResolved { id: defeater.clone(), status: d.status });
    }
    let status = match verdict {
        Verdict::Sustained => DefeaterStatus::Sustained,
        Verdict::Refuted => DefeaterStatus::Refuted,
    };
    Ok(graph.with_defeater_status(defeater, status))
}
