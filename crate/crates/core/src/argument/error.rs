use thiserror::Error;

/// A case document that cannot become a graph. Every variant names the
/// offending node and where it sits in the document.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaseError {
    #[error("malformed case document: {0}")]
    Parse(String),
    #[error("invalid node id {id:?}: ids are non-empty and contain no whitespace")]
    InvalidId { id: String },
    #[error("duplicate id {id} at {second} (first defined at {first})")]
    DuplicateId { id: String, first: String, second: String },
    #[error("dangling reference to {id} at {path}")]
    Dangling { id: String, path: String },
    #[error("{id} at {path} is a {found}, expected {expected}")]
    WrongRole { id: String, path: String, expected: String, found: String },
    #[error("block {block}: {message}")]
    Arity { block: String, message: String },
    #[error("value {value} at {path} outside {range}")]
    OutOfRange { path: String, value: f64, range: &'static str },
    #[error("claim {claim} is supported by more than one block ({blocks})")]
    MultipleSupport { claim: String, blocks: String },
    #[error("{node} appears under more than one block ({blocks})")]
    MultipleParents { node: String, blocks: String },
    #[error("side-claim {id} must warrant exactly one block, found {count}")]
    SideClaimAttachment { id: String, count: usize },
    #[error("side-claim {id} is used at {path}; side-claims are assigned, not supported or decomposed into")]
    SideClaimMisuse { id: String, path: String },
    #[error("evidence {id} must support exactly one evidence_incorporation block, found {count}")]
    EvidenceAttachment { id: String, count: usize },
    #[error("cycle detected: {}", path.join(" -> "))]
    Cycle { path: Vec<String> },
    #[error("expected exactly one top-level claim, found {}: [{}]", ids.len(), ids.join(", "))]
    TopLevelCount { ids: Vec<String> },
    #[error("case.top_claim is {declared} but the claim flagged is_top_level is {flagged}")]
    TopClaimMismatch { declared: String, flagged: String },
    #[error("top-level claim {id} appears as a child of block {block}")]
    TopClaimHasParent { id: String, block: String },
    #[error("{id} is not connected to the top-level claim")]
    Unreachable { id: String },
    #[error("residual doubt {id} is accepted but lacks {missing}")]
    IncompleteResidualDoubt { id: String, missing: String },
}
