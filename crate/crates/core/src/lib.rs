//! Building, validating and quantifying confidence in CAE assurance cases.
//!
//! - [`argument`]: the case document schema, graph construction and lint.
//! - [`soundness`]: validity of every node under defeater verdicts.
//! - [`confidence`]: weight-of-evidence measures and sum-of-doubts / product
//!   propagation, generic over the [`Scalar`] type.
//! - [`defeaters`]: refutation impact, prioritisation and the checklist.
//! - [`delphi`]: multi-round expert elicitation with pluggable backends.
//! - [`report`]: visual summary and sentencing statement.

pub mod argument;
pub mod bundled;
pub mod confidence;
pub mod defeaters;
pub mod delphi;
pub mod report;
pub mod scalar;
pub mod soundness;
#[cfg(any(test, feature = "test-support"))]
pub mod testing;

pub use argument::{build_graph, structural_lint, ArgumentGraph, CaseDocument, CaseError, NodeId};
pub use confidence::{propagate, whatif, ConfidenceError, Method, PropagationOptions};
pub use scalar::Scalar;
pub use soundness::{evaluate_validity, resolve_defeater, ValidityState, Verdict};

/// Exact rational arithmetic for propagation.
pub use num_rational::BigRational;

pub type Valuation = confidence::ConfidenceValuation<f64>;
pub type ExactValuation = confidence::ConfidenceValuation<BigRational>;
pub type Assignments = confidence::LeafAssignments<f64>;
pub type ExactAssignments = confidence::LeafAssignments<BigRational>;
pub type WhatIfResult = confidence::WhatIf<f64>;
