//! Decision-maker outputs: a multi-factor visual summary and a sentencing
//! statement. Risk is always framed as residual doubt.

mod sentence;
mod summary;

use thiserror::Error;

pub use sentence::{sentencing_statement, Clause, SentencingStatement, CLAUSES, NOT_PROVIDED};
pub use summary::{
    visual_summary, Caveats, DefeaterCaveat, DoubtCaveat, QuantifiedConfidence, SummaryAxes, SummaryRecord,
    VisualSummary, UNSUPPORTED_STAMP,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("{axis} must be an ordinal between 1 and 5, got {value}")]
    OrdinalOutOfRange { axis: &'static str, value: u8 },
    #[error("valuation has no value for the top claim {0}")]
    MissingTop(String),
}

/// Escapes text for SVG character data and attribute values.
pub(crate) fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}
