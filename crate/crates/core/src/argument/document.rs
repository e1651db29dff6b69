use serde::{Deserialize, Serialize};

use super::{ArgumentBlock, CaseError, Claim, Defeater, Evidence, NodeId, ResidualDoubt};
use crate::confidence::LeafAssignments;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMeta {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub top_claim: NodeId,
}

/// The serialized form of a case, as read from and written to case files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseDocument {
    pub case: CaseMeta,
    #[serde(default)]
    pub claims: Vec<Claim>,
    #[serde(default)]
    pub evidence: Vec<Evidence>,
    #[serde(default)]
    pub blocks: Vec<ArgumentBlock>,
    #[serde(default)]
    pub defeaters: Vec<Defeater>,
    #[serde(default)]
    pub residual_doubts: Vec<ResidualDoubt>,
    #[serde(default)]
    pub assignments: LeafAssignments<f64>,
}

impl CaseDocument {
    pub fn from_json(text: &str) -> Result<Self, CaseError> {
        serde_json::from_str(text).map_err(|e| CaseError::Parse(e.to_string()))
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, CaseError> {
        serde_json::from_value(value).map_err(|e| CaseError::Parse(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("case documents always serialize")
    }
}
