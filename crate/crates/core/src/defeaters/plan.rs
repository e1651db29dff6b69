use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use super::{impact_of_refutation, prioritisation_score, DefeaterError, PrioritisationWeights};
use crate::argument::{ArgumentGraph, Defeater, DefeaterStatus, NodeId};
use crate::confidence::{LeafAssignments, Method, PropagationOptions};

pub const INDEPENDENCE_ASSUMPTION: &str =
    "Defeaters are treated as mutually independent; interactions between them are not modelled.";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanEntry {
    pub id: NodeId,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredDefeater {
    pub id: NodeId,
    pub probability: f64,
    pub impact: f64,
    pub effort: f64,
    pub score: f64,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unscoreable {
    pub id: NodeId,
    pub reason: String,
}

/// Investigation order for unresolved defeaters. Stage 1 holds defeaters
/// that challenge a reasoning step, stage 2 those needing restructuring,
/// stage 3 the rest by descending score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrioritisationPlan {
    pub header: String,
    pub method: Method,
    pub weights: PrioritisationWeights,
    pub stage1: Vec<PlanEntry>,
    pub stage2: Vec<PlanEntry>,
    pub stage3: Vec<ScoredDefeater>,
    pub unscoreable: Vec<Unscoreable>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PrioritisationPlan {
    pub fn stage3_order(&self) -> Vec<NodeId> {
        self.stage3.iter().map(|s| s.id.clone()).collect()
    }

    /// Every defeater id in plan order.
    pub fn all_ids(&self) -> Vec<NodeId> {
        self.stage1
            .iter()
            .map(|e| e.id.clone())
            .chain(self.stage2.iter().map(|e| e.id.clone()))
            .chain(self.stage3.iter().map(|e| e.id.clone()))
            .chain(self.unscoreable.iter().map(|e| e.id.clone()))
            .collect()
    }
}

/// Inputs for a stage-3 defeater, independent of the weights.
struct Candidate {
    id: NodeId,
    probability: f64,
    impact: f64,
    effort: f64,
}

struct Partition {
    stage1: Vec<PlanEntry>,
    stage2: Vec<PlanEntry>,
    candidates: Vec<Candidate>,
    unscoreable: Vec<Unscoreable>,
    warnings: Vec<String>,
}

fn stage3_inputs(
    graph: &ArgumentGraph,
    assign: &LeafAssignments<f64>,
    method: Method,
    d: &Defeater,
    options: &PropagationOptions,
    warnings: &mut Vec<String>,
) -> Result<Candidate, String> {
    let probability = d
        .prior_sustain_probability
        .ok_or("missing prior_sustain_probability")?;
    if !(0.0..=1.0).contains(&probability) {
        return Err(format!("probability {probability} outside [0, 1]"));
    }
    let effort = d.effort.ok_or("missing effort")?;
    if !(effort > 0.0 && effort <= 1.0) {
        return Err(format!("effort {effort} outside (0, 1]"));
    }
    let impact = impact_of_refutation(graph, assign, method, &d.id, options).map_err(|e| e.to_string())?;
    if let Some(w) = impact.warning {
        warnings.push(w);
    }
    Ok(Candidate { id: d.id.clone(), probability, impact: impact.impact, effort })
}

fn partition(
    graph: &ArgumentGraph,
    assign: &LeafAssignments<f64>,
    method: Method,
    options: &PropagationOptions,
) -> Partition {
    let mut unresolved: Vec<&Defeater> = graph
        .defeaters()
        .iter()
        .filter(|d| d.status == DefeaterStatus::Unresolved)
        .collect();
    unresolved.sort_by(|a, b| a.id.cmp(&b.id));

    let mut p = Partition {
        stage1: Vec::new(),
        stage2: Vec::new(),
        candidates: Vec::new(),
        unscoreable: Vec::new(),
        warnings: Vec::new(),
    };
    for d in unresolved {
        if d.challenges_reasoning_step {
            p.stage1.push(PlanEntry {
                id: d.id.clone(),
                rationale: format!("challenges a reasoning step at {}; settle before scoring", d.target),
            });
        } else if d.requires_restructuring {
            p.stage2.push(PlanEntry {
                id: d.id.clone(),
                rationale: format!("refutation would require restructuring around {}", d.target),
            });
        } else {
            match stage3_inputs(graph, assign, method, d, options, &mut p.warnings) {
                Ok(c) => p.candidates.push(c),
                Err(reason) => p.unscoreable.push(Unscoreable { id: d.id.clone(), reason }),
            }
        }
    }
    p
}

fn score_candidates(candidates: &[Candidate], weights: &PrioritisationWeights) -> Result<Vec<ScoredDefeater>, DefeaterError> {
    let mut scored = candidates
        .iter()
        .map(|c| {
            let score = prioritisation_score(c.probability, c.impact, c.effort, weights)?;
            Ok(ScoredDefeater {
                id: c.id.clone(),
                probability: c.probability,
                impact: c.impact,
                effort: c.effort,
                score,
                rationale: format!(
                    "({} x {} + {} x {}) / ({} x {}) = {:.2}",
                    weights.w_probability, c.probability, weights.w_impact, c.impact, weights.w_effort, c.effort, score
                ),
            })
        })
        .collect::<Result<Vec<_>, DefeaterError>>()?;
    scored.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal).then_with(|| a.id.cmp(&b.id)));
    Ok(scored)
}

/// Orders the unresolved defeaters for investigation. Defeaters lacking a
/// probability, effort or counterfactual land in `unscoreable`.
pub fn prioritise(
    graph: &ArgumentGraph,
    assign: &LeafAssignments<f64>,
    method: Method,
    weights: &PrioritisationWeights,
    options: &PropagationOptions,
) -> Result<PrioritisationPlan, DefeaterError> {
    weights.validate()?;
    let p = partition(graph, assign, method, options);
    let stage3 = score_candidates(&p.candidates, weights)?;
    Ok(PrioritisationPlan {
        header: INDEPENDENCE_ASSUMPTION.to_string(),
        method,
        weights: *weights,
        stage1: p.stage1,
        stage2: p.stage2,
        stage3,
        unscoreable: p.unscoreable,
        warnings: p.warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub weights: PrioritisationWeights,
    pub order: Vec<NodeId>,
    pub scores: Vec<f64>,
    /// Whether the stage-3 order differs from the first grid point.
    pub order_changed: bool,
}

/// Re-scores stage 3 under each weight vector in `grid`. Impacts are
/// computed once.
pub fn sensitivity(
    graph: &ArgumentGraph,
    assign: &LeafAssignments<f64>,
    method: Method,
    grid: &[PrioritisationWeights],
    options: &PropagationOptions,
) -> Result<Vec<SensitivityRow>, DefeaterError> {
    let p = partition(graph, assign, method, options);
    let mut rows: Vec<SensitivityRow> = Vec::with_capacity(grid.len());
    for weights in grid {
        let scored = score_candidates(&p.candidates, weights)?;
        let order: Vec<NodeId> = scored.iter().map(|s| s.id.clone()).collect();
        let order_changed = rows.first().is_some_and(|first| first.order != order);
        rows.push(SensitivityRow { weights: *weights, order, scores: scored.iter().map(|s| s.score).collect(), order_changed });
    }
    Ok(rows)
}

impl fmt::Display for PrioritisationPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.header)?;
        writeln!(
            f,
            "method: {}  weights: wp={} wi={} we={}",
            self.method, self.weights.w_probability, self.weights.w_impact, self.weights.w_effort
        )?;
        for (name, entries) in [("stage 1 (reasoning steps)", &self.stage1), ("stage 2 (restructuring)", &self.stage2)] {
            writeln!(f, "\n{name}:")?;
            if entries.is_empty() {
                writeln!(f, "  (none)")?;
            }
            for e in entries {
                writeln!(f, "  {:<8} {}", e.id, e.rationale)?;
            }
        }
        writeln!(f, "\nstage 3 (scored):")?;
        writeln!(f, "  {:<8} {:>6} {:>7} {:>7} {:>7}", "id", "p", "impact", "effort", "score")?;
        for s in &self.stage3 {
            writeln!(f, "  {:<8} {:>6.2} {:>7.2} {:>7.2} {:>7.2}", s.id, s.probability, s.impact, s.effort, s.score)?;
        }
        if !self.unscoreable.is_empty() {
            writeln!(f, "\nunscoreable:")?;
            for u in &self.unscoreable {
                writeln!(f, "  {:<8} {}", u.id, u.reason)?;
            }
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argument::id;
    use crate::bundled::offline;

    fn plan_of(g: &ArgumentGraph) -> PrioritisationPlan {
        prioritise(g, g.assignments(), Method::Product, &Default::default(), &Default::default()).unwrap()
    }

    fn edit(f: impl FnOnce(&mut crate::CaseDocument)) -> ArgumentGraph {
        let mut doc = offline().to_document();
        f(&mut doc);
        crate::build_graph(doc).unwrap()
    }

    #[test]
    fn offline_order() {
        let plan = plan_of(&offline());
        assert_eq!(plan.stage3_order(), vec![id("D1"), id("D2")]);
        assert!((plan.stage3[0].score - 1.383_333_333_333_333).abs() < 1e-9);
        assert!((plan.stage3[1].score - 0.85).abs() < 1e-9);
        assert!(plan.stage1.is_empty() && plan.stage2.is_empty() && plan.unscoreable.is_empty());
        assert_eq!(plan.header, INDEPENDENCE_ASSUMPTION);
        let table = plan.to_string();
        assert!(table.contains("1.38") && table.contains("0.85"));
    }

    #[test]
    fn reasoning_step_goes_first() {
        let g = edit(|d| d.defeaters[1].challenges_reasoning_step = true);
        let plan = plan_of(&g);
        assert_eq!(plan.stage1.iter().map(|e| e.id.clone()).collect::<Vec<_>>(), vec![id("D2")]);
        assert_eq!(plan.stage3_order(), vec![id("D1")]);
    }

    #[test]
    fn restructuring_is_stage_two_unless_stage_one() {
        let g = edit(|d| {
            d.defeaters[0].requires_restructuring = true;
            d.defeaters[1].requires_restructuring = true;
            d.defeaters[1].challenges_reasoning_step = true;
        });
        let plan = plan_of(&g);
        assert_eq!(plan.stage1[0].id, id("D2"));
        assert_eq!(plan.stage2[0].id, id("D1"));
        assert!(plan.stage3.is_empty());
    }

    #[test]
    fn ties_break_by_id() {
        let g = edit(|d| {
            let mut twin = d.defeaters[0].clone();
            twin.id = id("D0");
            d.defeaters.push(twin);
        });
        let plan = plan_of(&g);
        assert_eq!(plan.stage3_order(), vec![id("D0"), id("D1"), id("D2")]);
        assert_eq!(plan.stage3[0].score, plan.stage3[1].score);
    }

    #[test]
    fn missing_inputs_are_unscoreable() {
        let g = edit(|d| {
            d.defeaters[0].effort = None;
            d.defeaters[1].refuted_posterior = None;
        });
        let plan = plan_of(&g);
        assert!(plan.stage3.is_empty());
        assert_eq!(plan.unscoreable.len(), 2);
        assert!(plan.unscoreable[0].reason.contains("effort"));
        assert!(plan.unscoreable[1].reason.contains("refuted_posterior"));
    }

    #[test]
    fn resolved_defeaters_are_excluded() {
        let g = crate::resolve_defeater(&offline(), &id("D1"), crate::Verdict::Refuted).unwrap();
        assert_eq!(plan_of(&g).all_ids(), vec![id("D2")]);
    }

    #[test]
    fn sensitivity_reports_order_changes() {
        let g = offline();
        let grid = [
            PrioritisationWeights::default(),
            PrioritisationWeights::new(1.0, 1.0, 5.0).unwrap(),
            PrioritisationWeights::new(0.01, 1.0, 1.0).unwrap(),
        ];
        let rows = sensitivity(&g, g.assignments(), Method::Product, &grid, &Default::default()).unwrap();
        assert!(!rows[0].order_changed);
        assert!(!rows[1].order_changed);
        assert_eq!(rows[1].order, vec![id("D1"), id("D2")]);
        // With probability nearly ignored, impact/effort decides: 0.08/0.6 vs 0.03/0.8.
        assert_eq!(rows[2].order, vec![id("D1"), id("D2")]);
    }

    #[test]
    fn sensitivity_detects_a_flip() {
        let g = edit(|d| {
            d.defeaters[1].prior_sustain_probability = Some(0.95);
            d.defeaters[0].prior_sustain_probability = Some(0.2);
            d.defeaters[0].effort = Some(0.2);
        });
        // D1: (0.2 + 0.08) / 0.2 = 1.4, D2: (0.95 + 0.03) / 0.8 = 1.225.
        // Heavier probability weight: D1 (2 + 0.08)/0.2 = 10.4 vs D2 (9.5 + 0.03)/0.8 = 11.9.
        let grid = [PrioritisationWeights::default(), PrioritisationWeights::new(10.0, 1.0, 1.0).unwrap()];
        let rows = sensitivity(&g, g.assignments(), Method::Product, &grid, &Default::default()).unwrap();
        assert_eq!(rows[0].order, vec![id("D1"), id("D2")]);
        assert_eq!(rows[1].order, vec![id("D2"), id("D1")]);
        assert!(rows[1].order_changed);
    }
}
