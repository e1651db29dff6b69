//! Weight-of-evidence measures and probabilistic confidence propagation.

mod assignments;
mod measures;
mod propagate;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::argument::NodeId;

pub use assignments::{LeafAssignments, Likelihoods};
pub use measures::{diversity_ratio, eells, keynes, KEYNES_LOG_BASE};
pub use propagate::{
    propagate, uniform_required_confidence, whatif, AppliedAdjustment, ConfidenceValuation, PropagationOptions,
    WhatIf,
};
pub use report::{valuation_report, ValuationReport, WeightOfEvidence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Conservative lower bound: doubts add up.
    #[serde(alias = "sod")]
    SumOfDoubts,
    /// Independent supports multiply.
    #[default]
    Product,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::SumOfDoubts => "sum_of_doubts",
            Method::Product => "product",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::SumOfDoubts => "sum of doubts",
            Method::Product => "product",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = ConfidenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "sod" | "sum_of_doubts" => Ok(Method::SumOfDoubts),
            "product" | "prod" => Ok(Method::Product),
            _ => Err(ConfidenceError::UnknownMethod(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfidenceError {
    #[error("missing {kind} assignment for {node}")]
    MissingAssignment { node: NodeId, kind: &'static str },
    #[error("assignment for {node} is {value}, outside [0, 1]")]
    OutOfRange { node: NodeId, value: f64 },
    #[error("block {0} lacks a warrant (pass allow-missing-warrant to treat it as 1)")]
    MissingWarrant(NodeId),
    #[error("{0} is not an assigned posterior or warrant")]
    UnknownOverride(NodeId),
    #[error("undefined measure: {0}")]
    UndefinedMeasure(&'static str),
    #[error("{0} cannot be represented in the chosen scalar type")]
    NotRepresentable(f64),
    #[error("unknown propagation method {0:?} (expected sod or product)")]
    UnknownMethod(String),
}
