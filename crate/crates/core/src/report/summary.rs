use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{xml_escape, ReportError};
use crate::argument::{ArgumentGraph, DefeaterStatus, DefeaterType, DoubtCategory, NodeId};
use crate::confidence::{ConfidenceValuation, Method};
use crate::soundness::{evaluate_validity, ValidityState};

pub const UNSUPPORTED_STAMP: &str = "LOGICALLY UNSUPPORTED — confidence shown for what-if only";

/// Analyst judgements on the three qualitative axes, each 1 (weak) to 5
/// (strong).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryAxes {
    pub evidence_quality: u8,
    pub argumentation_quality: u8,
    pub scientific_agreement: u8,
}

impl SummaryAxes {
    pub fn new(evidence_quality: u8, argumentation_quality: u8, scientific_agreement: u8) -> Result<Self, ReportError> {
        let a = SummaryAxes { evidence_quality, argumentation_quality, scientific_agreement };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        for (axis, value) in self.ordinals() {
            if !(1..=5).contains(&value) {
                return Err(ReportError::OrdinalOutOfRange { axis, value });
            }
        }
        Ok(())
    }

    fn ordinals(&self) -> [(&'static str, u8); 3] {
        [
            ("evidence quality", self.evidence_quality),
            ("argumentation quality", self.argumentation_quality),
            ("scientific agreement", self.scientific_agreement),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantifiedConfidence {
    pub value: f64,
    pub method: Method,
    /// e.g. "0.17 (product)".
    pub display: String,
    pub residual_doubt: f64,
    pub validity: ValidityState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefeaterCaveat {
    pub id: NodeId,
    pub defeater_type: DefeaterType,
    pub target: NodeId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoubtCaveat {
    pub id: NodeId,
    pub category: DoubtCategory,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Caveats {
    pub unresolved_defeaters: Vec<DefeaterCaveat>,
    pub accepted_residual_doubts: Vec<DoubtCaveat>,
}

/// The content of the summary graphic as data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRecord {
    pub case_id: String,
    pub title: String,
    pub top_claim_id: NodeId,
    pub top_claim: String,
    pub axes: SummaryAxes,
    pub quantified_confidence: QuantifiedConfidence,
    pub caveats: Caveats,
    pub framing: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisualSummary {
    pub svg: String,
    pub record: SummaryRecord,
}

const WIDTH: u32 = 960;
const BAR_X: u32 = 260;
const BAR_W: u32 = 400;

fn ordinal_bar(svg: &mut String, y: u32, label: &str, value: u8) {
    let _ = writeln!(svg, r#"  <text x="24" y="{}" class="label">{}</text>"#, y + 17, xml_escape(label));
    let seg = BAR_W / 5;
    for i in 0..5u32 {
        let class = if i < u32::from(value) { "filled" } else { "empty" };
        let _ = writeln!(
            svg,
            r#"  <rect x="{}" y="{y}" width="{}" height="24" class="{class}"/>"#,
            BAR_X + i * seg,
            seg - 4
        );
    }
    let _ = writeln!(svg, r#"  <text x="{}" y="{}" class="value">{value} / 5</text>"#, BAR_X + BAR_W + 16, y + 17);
}

/// Renders the four-axis summary. The confidence axis shows the top-claim
/// value with its method and the residual doubt; a stamp marks it when the
/// top claim is not SUPPORTED.
pub fn visual_summary(
    graph: &ArgumentGraph,
    valuation: &ConfidenceValuation<f64>,
    axes: SummaryAxes,
) -> Result<VisualSummary, ReportError> {
    axes.validate()?;
    let top = graph.top_claim();
    let value = *valuation.value(&top.id).ok_or_else(|| ReportError::MissingTop(top.id.to_string()))?;
    let validity = evaluate_validity(graph).state(&top.id).unwrap_or(ValidityState::Supported);
    let stamp = (validity != ValidityState::Supported).then(|| UNSUPPORTED_STAMP.to_string());
    let quantified = QuantifiedConfidence {
        value,
        method: valuation.method,
        display: format!("{value:.2} ({})", valuation.method.label()),
        residual_doubt: 1.0 - value,
        validity,
        stamp,
    };

    let mut unresolved: Vec<DefeaterCaveat> = graph
        .defeaters()
        .iter()
        .filter(|d| d.status == DefeaterStatus::Unresolved)
        .map(|d| DefeaterCaveat { id: d.id.clone(), defeater_type: d.defeater_type, target: d.target.clone(), text: d.text.clone() })
        .collect();
    unresolved.sort_by(|a, b| a.id.cmp(&b.id));
    let mut accepted: Vec<DoubtCaveat> = graph
        .residual_doubts()
        .iter()
        .filter(|r| r.accepted)
        .map(|r| DoubtCaveat { id: r.id.clone(), category: r.category, description: r.description.clone() })
        .collect();
    accepted.sort_by(|a, b| a.id.cmp(&b.id));

    let meta = graph.meta();
    let record = SummaryRecord {
        case_id: meta.id.clone(),
        title: meta.title.clone(),
        top_claim_id: top.id.clone(),
        top_claim: top.statement.clone(),
        axes,
        quantified_confidence: quantified,
        caveats: Caveats { unresolved_defeaters: unresolved, accepted_residual_doubts: accepted },
        framing: "negative",
    };
    let svg = render(&record);
    Ok(VisualSummary { svg, record })
}

fn render(r: &SummaryRecord) -> String {
    let q = &r.quantified_confidence;
    let caveat_lines = 2 + r.caveats.unresolved_defeaters.len().max(1) + r.caveats.accepted_residual_doubts.len().max(1);
    let height = 330 + 22 * caveat_lines as u32;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    s.push_str(
        "  <style>text{font-family:sans-serif;font-size:14px;fill:#222}.title{font-size:18px;font-weight:bold}\
.claim{font-style:italic}.label{font-weight:bold}.filled{fill:#3b6ea5}.empty{fill:#dde3ea}\
.conf{fill:#c0392b}.stamp{fill:#c0392b;font-weight:bold}.small{font-size:12px}</style>\n",
    );
    let _ = writeln!(s, r#"  <rect x="0" y="0" width="{WIDTH}" height="{height}" fill="white"/>"#);
    let _ = writeln!(s, r#"  <text x="24" y="32" class="title">{}</text>"#, xml_escape(&r.title));
    let _ = writeln!(s, r#"  <text x="24" y="58">Top claim {}:</text>"#, xml_escape(r.top_claim_id.as_str()));
    let _ = writeln!(s, r#"  <text x="24" y="80" class="claim">{}</text>"#, xml_escape(&r.top_claim));

    ordinal_bar(&mut s, 104, "Evidence quality", r.axes.evidence_quality);
    ordinal_bar(&mut s, 140, "Argumentation quality", r.axes.argumentation_quality);
    ordinal_bar(&mut s, 176, "Scientific agreement", r.axes.scientific_agreement);

    let y = 212;
    let _ = writeln!(s, r#"  <text x="24" y="{}" class="label">Quantified confidence</text>"#, y + 17);
    let _ = writeln!(s, r#"  <rect x="{BAR_X}" y="{y}" width="{BAR_W}" height="24" class="empty"/>"#);
    let filled = (q.value.clamp(0.0, 1.0) * f64::from(BAR_W)).round();
    let _ = writeln!(s, r#"  <rect x="{BAR_X}" y="{y}" width="{filled}" height="24" class="conf"/>"#);
    let _ = writeln!(s, r#"  <text x="{}" y="{}" class="value">{}</text>"#, BAR_X + BAR_W + 16, y + 17, xml_escape(&q.display));
    let _ = writeln!(
        s,
        r#"  <text x="{BAR_X}" y="{}" class="small">Residual doubt in the top claim: {:.2}</text>"#,
        y + 44,
        q.residual_doubt
    );
    if let Some(stamp) = &q.stamp {
        let _ = writeln!(s, r#"  <text x="24" y="{}" class="stamp">{}</text>"#, y + 72, xml_escape(stamp));
    }

    let mut cy = 320;
    let _ = writeln!(s, r#"  <text x="24" y="{cy}" class="label">Unresolved defeaters</text>"#);
    cy += 22;
    if r.caveats.unresolved_defeaters.is_empty() {
        let _ = writeln!(s, r#"  <text x="40" y="{cy}" class="small">(none)</text>"#);
        cy += 22;
    }
    for d in &r.caveats.unresolved_defeaters {
        let line = format!("{} ({} against {}): {}", d.id, d.defeater_type, d.target, d.text);
        let _ = writeln!(s, r#"  <text x="40" y="{cy}" class="small">{}</text>"#, xml_escape(&line));
        cy += 22;
    }
    let _ = writeln!(s, r#"  <text x="24" y="{cy}" class="label">Accepted residual doubts</text>"#);
    cy += 22;
    if r.caveats.accepted_residual_doubts.is_empty() {
        let _ = writeln!(s, r#"  <text x="40" y="{cy}" class="small">(none)</text>"#);
    }
    for d in &r.caveats.accepted_residual_doubts {
        let line = format!("{} ({}): {}", d.id, d.category.as_str(), d.description);
        let _ = writeln!(s, r#"  <text x="40" y="{cy}" class="small">{}</text>"#, xml_escape(&line));
        cy += 22;
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::argument::id;
    use crate::bundled::offline;
    use crate::confidence::{propagate, PropagationOptions};

    fn summary(g: &ArgumentGraph, method: Method) -> VisualSummary {
        let v = propagate(g, g.assignments(), method, &PropagationOptions::default()).unwrap();
        visual_summary(g, &v, SummaryAxes::new(4, 4, 2).unwrap()).unwrap()
    }

    #[test]
    fn offline_summary() {
        let g = offline();
        let s = summary(&g, Method::Product);
        assert!(s.svg.contains("Maximum time to detect novel cyber attack type and take frontier AI offline is 7 days"));
        assert!(s.svg.contains("0.17 (product)"));
        assert!(s.svg.contains(UNSUPPORTED_STAMP));
        assert!(s.svg.contains("Residual doubt in the top claim: 0.83"));
        assert!(s.svg.contains("D1 (undermining against E2.2.1.1)"));
        assert_eq!(s.record.quantified_confidence.display, "0.17 (product)");
        assert_eq!(s.record.quantified_confidence.validity, ValidityState::Unsupported);
        assert_eq!(s.record.caveats.unresolved_defeaters.len(), 2);
        assert!(s.record.caveats.accepted_residual_doubts.is_empty());
        assert!(s.svg.starts_with("<svg") && s.svg.ends_with("</svg>\n"));
    }

    #[test]
    fn deterministic() {
        let g = offline();
        assert_eq!(summary(&g, Method::Product).svg, summary(&g, Method::Product).svg);
    }

    #[test]
    fn supported_case_has_no_stamp() {
        let g = crate::resolve_defeater(&offline(), &id("D1"), crate::Verdict::Refuted).unwrap();
        let g = crate::resolve_defeater(&g, &id("D2"), crate::Verdict::Refuted).unwrap();
        let s = summary(&g, Method::SumOfDoubts);
        assert!(!s.svg.contains("LOGICALLY UNSUPPORTED"));
        assert!(s.record.quantified_confidence.stamp.is_none());
        assert!(s.svg.contains("0.00 (sum of doubts)"));
        assert!(s.svg.contains("(none)"));
    }

    #[test]
    fn accepted_doubts_listed() {
        let mut doc = offline().to_document();
        doc.residual_doubts[0].accepted = true;
        doc.residual_doubts[0].acceptance_rationale = Some("timeliness is covered elsewhere".into());
        doc.residual_doubts[0].likelihood = Some(crate::argument::Likelihood::Probability(0.05));
        let g = crate::build_graph(doc).unwrap();
        let s = summary(&g, Method::Product);
        assert!(s.svg.contains("RD1 (evidential)"));
        assert_eq!(s.record.caveats.accepted_residual_doubts.len(), 1);
    }

    #[test]
    fn markup_in_text_is_escaped() {
        let mut doc = offline().to_document();
        doc.claims[0].statement = "Risk < 1 & stays \"low\"".into();
        let g = crate::build_graph(doc).unwrap();
        let s = summary(&g, Method::Product);
        assert!(s.svg.contains("Risk &lt; 1 &amp; stays &quot;low&quot;"));
        assert_eq!(s.record.top_claim, "Risk < 1 & stays \"low\"");
    }

    #[test]
    fn ordinals_checked() {
        assert!(SummaryAxes::new(0, 3, 3).is_err());
        assert!(SummaryAxes::new(3, 6, 3).is_err());
        let g = offline();
        let v = propagate(&g, g.assignments(), Method::Product, &PropagationOptions::default()).unwrap();
        let bad = SummaryAxes { evidence_quality: 9, argumentation_quality: 1, scientific_agreement: 1 };
        assert!(visual_summary(&g, &v, bad).is_err());
    }

    #[test]
    fn negative_framing_only() {
        let re = regex::Regex::new(r"(?i)\d+(\.\d+)?\s*%?\s*safe|safe\s*:?\s*\d").unwrap();
        let g = offline();
        for m in [Method::Product, Method::SumOfDoubts] {
            let s = summary(&g, m);
            assert!(!re.is_match(&s.svg), "{}", s.svg);
            let st = crate::report::sentencing_statement(&g, &propagate(&g, g.assignments(), m, &Default::default()).unwrap(), &BTreeMap::new());
            assert!(!re.is_match(&st.text));
        }
        assert_eq!(summary(&g, Method::Product).record.framing, "negative");
    }
}
