use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::bundled::CHECKLIST_JSON;

/// A prompt for surfacing defeaters, with a worked example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChecklistItem {
    pub category: String,
    pub name: String,
    pub prompt: String,
    pub example: String,
}

fn items() -> &'static [ChecklistItem] {
    static ITEMS: OnceLock<Vec<ChecklistItem>> = OnceLock::new();
    ITEMS.get_or_init(|| serde_json::from_str(CHECKLIST_JSON).expect("bundled checklist parses"))
}

/// The bundled checklist, optionally restricted to one category. The
/// filter is case-insensitive; an unknown category yields nothing.
pub fn checklist(category: Option<&str>) -> Vec<ChecklistItem> {
    items()
        .iter()
        .filter(|i| category.is_none_or(|c| i.category.eq_ignore_ascii_case(c.trim())))
        .cloned()
        .collect()
}

/// Category names in bundle order.
pub fn checklist_categories() -> Vec<&'static str> {
    let mut out: Vec<&'static str> = Vec::new();
    for i in items() {
        if !out.contains(&i.category.as_str()) {
            out.push(&i.category);
        }
    }
    out
}
