//! Data shipped with the crate.

use crate::argument::ArgumentGraph;

/// The C2.2.1 cyber-misuse fragment: one decomposition into three
/// evidence-backed sub-claims, four warrants and two defeaters.
pub const OFFLINE_CASE: &str = include_str!("../data/offline.case.json");

/// Defeater checklist, grouped by category.
pub const CHECKLIST_JSON: &str = include_str!("../data/checklist.json");

/// Expert roles for Delphi panels, one per line.
pub const ROLES: &str = include_str!("../data/roles.txt");

/// Scenario fixture for `delphi bench`.
pub const SCENARIOS_FIXTURE: &str = include_str!("../data/scenarios.fixture.json");

pub fn offline() -> ArgumentGraph {
    ArgumentGraph::from_json(OFFLINE_CASE).expect("bundled case is valid")
}
