use std::collections::BTreeMap;

use num_traits::Float;
use serde::Serialize;

use super::{ConfidenceError, LeafAssignments, Method};
use crate::argument::{ArgumentGraph, BlockKind, NodeId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropagationOptions {
    /// Treat a missing warrant on a decomposition or substitution as
    /// confidence 1 instead of failing.
    pub allow_missing_warrant: bool,
    /// Decimal places at which what-if deltas are reported. The top values
    /// are rounded to this precision before they are differenced, so a
    /// delta is the change a reader of the reported values sees. `None`
    /// reports the raw difference.
    pub delta_decimals: Option<u32>,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions { allow_missing_warrant: false, delta_decimals: Some(2) }
    }
}

/// A manual adjustment that changed a block's value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppliedAdjustment {
    pub block: NodeId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor_f: Option<f64>,
    #[serde(rename = "override", skip_serializing_if = "Option::is_none")]
    pub override_value: Option<f64>,
}

/// Confidence in every claim under one propagation method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceValuation<T> {
    pub method: Method,
    /// Clamped to [0, 1]. Warrants carry their assigned confidence.
    pub per_node: BTreeMap<NodeId, T>,
    /// Block results before clamping, keyed by the supported claim.
    pub raw_per_node: BTreeMap<NodeId, T>,
    pub adjustments_applied: Vec<AppliedAdjustment>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> ConfidenceValuation<T> {
    pub fn value(&self, node: &NodeId) -> Option<&T> {
        self.per_node.get(node)
    }

    pub fn raw(&self, node: &NodeId) -> Option<&T> {
        self.raw_per_node.get(node)
    }

    pub fn top(&self, graph: &ArgumentGraph) -> T {
        self.per_node[&graph.top_claim().id].clone()
    }
}

fn assigned<T: Scalar>(map: &BTreeMap<NodeId, T>, node: &NodeId, kind: &'static str) -> Result<T, ConfidenceError> {
    let v = map
        .get(node)
        .ok_or_else(|| ConfidenceError::MissingAssignment { node: node.clone(), kind })?;
    if !v.in_unit_interval() {
        return Err(ConfidenceError::OutOfRange { node: node.clone(), value: v.as_f64() });
    }
    Ok(v.clone())
}

/// Propagates assigned confidences bottom-up through every block.
///
/// Per block, with warrant confidence `w` and inputs `x1..xn` (the
/// posterior for evidence incorporation, sub-claim confidences otherwise):
/// product gives `w * x1 * .. * xn`, sum-of-doubts gives
/// `w + x1 + .. + xn - n`. The result is multiplied by the block's
/// `factor_f` and clamped to [0, 1]; an override replaces it outright.
pub fn propagate<T: Scalar>(
    graph: &ArgumentGraph,
    assign: &LeafAssignments<T>,
    method: Method,
    options: &PropagationOptions,
) -> Result<ConfidenceValuation<T>, ConfidenceError> {
    let mut per_node = BTreeMap::new();
    let mut raw_per_node = BTreeMap::new();
    let mut adjustments_applied = Vec::new();
    let mut warnings = Vec::new();

    for w in graph.warrants() {
        per_node.insert(w.id.clone(), assigned(&assign.warrant_conf, &w.id, "warrant confidence")?);
    }
    for c in graph.claims().iter().filter(|c| !c.is_side_claim) {
        if graph.support_of(&c.id).is_none() {
            per_node.insert(c.id.clone(), assigned(&assign.posterior, &c.id, "posterior")?);
        }
    }

    for block in graph.blocks_bottom_up() {
        let warrant = match &block.warrant {
            Some(w) => per_node[w].clone(),
            None if block.kind == BlockKind::EvidenceIncorporation => T::one(),
            None if options.allow_missing_warrant => {
                warnings.push(format!("{} lacks warrant; treated as confidence 1", block.id));
                T::one()
            }
            None => return Err(ConfidenceError::MissingWarrant(block.id.clone())),
        };
        let inputs: Vec<T> = match block.kind {
            BlockKind::EvidenceIncorporation => vec![assigned(&assign.posterior, &block.parent_claim, "posterior")?],
            _ => block.children.iter().map(|c| per_node[c].clone()).collect(),
        };
        let n = T::from_f64(inputs.len() as f64).expect("small integers are representable");
        let formula = match method {
            Method::Product => inputs.into_iter().fold(warrant, |acc, x| acc * x),
            Method::SumOfDoubts => inputs.into_iter().fold(warrant, |acc, x| acc + x) - n,
        };

        let adjustment = block.adjustment.unwrap_or_default();
        let (raw, value) = match adjustment.override_value {
            Some(v) => {
                adjustments_applied.push(AppliedAdjustment {
                    block: block.id.clone(),
                    factor_f: None,
                    override_value: Some(v),
                });
                let v = T::from_f64(v).ok_or(ConfidenceError::NotRepresentable(v))?;
                (v.clone(), v)
            }
            None => {
                let raw = if adjustment.factor_f != 1.0 {
                    adjustments_applied.push(AppliedAdjustment {
                        block: block.id.clone(),
                        factor_f: Some(adjustment.factor_f),
                        override_value: None,
                    });
                    let f = T::from_f64(adjustment.factor_f).ok_or(ConfidenceError::NotRepresentable(adjustment.factor_f))?;
                    formula * f
                } else {
                    formula
                };
                let clamped = raw.clamp_unit();
                (raw, clamped)
            }
        };
        raw_per_node.insert(block.parent_claim.clone(), raw);
        per_node.insert(block.parent_claim.clone(), value);
    }

    Ok(ConfidenceValuation { method, per_node, raw_per_node, adjustments_applied, warnings })
}

/// Outcome of re-propagating with some assignments replaced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhatIf<T> {
    pub valuation: ConfidenceValuation<T>,
    pub baseline_top: T,
    pub top: T,
    /// Change in top confidence at the reporting precision.
    pub delta_top: T,
    pub raw_delta_top: T,
}

pub fn whatif<T: Scalar>(
    graph: &ArgumentGraph,
    assign: &LeafAssignments<T>,
    method: Method,
    overrides: &BTreeMap<NodeId, T>,
    options: &PropagationOptions,
) -> Result<WhatIf<T>, ConfidenceError> {
    let baseline = propagate(graph, assign, method, options)?;
    let mut changed = assign.clone();
    for (node, v) in overrides {
        changed.set(node, v.clone())?;
    }
    let valuation = propagate(graph, &changed, method, options)?;
    let baseline_top = baseline.top(graph);
    let top = valuation.top(graph);
    let raw_delta_top = top.clone() - baseline_top.clone();
    let delta_top = match options.delta_decimals {
        Some(dp) => (top.round_dp(dp) - baseline_top.round_dp(dp)).round_dp(dp),
        None => raw_delta_top.clone(),
    };
    Ok(WhatIf { valuation, baseline_top, top, delta_top, raw_delta_top })
}

/// The common value every assigned probability needs for the top of a flat
/// conjunction of `n_assigned` inputs to reach `target`.
pub fn uniform_required_confidence<F: Float>(target: F, n_assigned: u32, method: Method) -> F {
    let n = F::from(n_assigned.max(1)).expect("u32 fits a float");
    match method {
        Method::SumOfDoubts => (target + n - F::one()) / n,
        Method::Product => target.powf(F::one() / n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argument::{id, PropagationAdjustment};
    use crate::bundled::offline;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn opts() -> PropagationOptions {
        PropagationOptions::default()
    }

    #[test]
    fn product_on_offline() {
        let g = offline();
        let v = propagate(&g, g.assignments(), Method::Product, &opts()).unwrap();
        assert!(close(v.per_node[&id("C2.2.1.1")], 0.48, 1e-12));
        assert!(close(v.per_node[&id("C2.2.1.2")], 0.81, 1e-12));
        assert!(close(v.per_node[&id("C2.2.1.3")], 0.56, 1e-12));
        assert!(close(v.top(&g), 0.174_182_4, 1e-12));
        assert!(close(v.raw(&id("C2.2.1")).copied().unwrap(), 0.174_182_4, 1e-12));
        assert!(v.adjustments_applied.is_empty());
    }

    #[test]
    fn sum_of_doubts_on_offline_clamps_at_zero() {
        let g = offline();
        let v = propagate(&g, g.assignments(), Method::SumOfDoubts, &opts()).unwrap();
        assert!(close(v.per_node[&id("C2.2.1.1")], 0.4, 1e-12));
        assert!(close(v.per_node[&id("C2.2.1.2")], 0.8, 1e-12));
        assert!(close(v.per_node[&id("C2.2.1.3")], 0.5, 1e-12));
        assert!(close(v.raw_per_node[&id("C2.2.1")], -0.5, 1e-12));
        assert_eq!(v.top(&g), 0.0);
    }

    #[test]
    fn certainty_propagates_as_certainty() {
        let g = offline();
        let mut a = g.assignments().clone();
        a.posterior.values_mut().for_each(|x| *x = 1.0);
        a.warrant_conf.values_mut().for_each(|x| *x = 1.0);
        for m in [Method::Product, Method::SumOfDoubts] {
            let v = propagate(&g, &a, m, &opts()).unwrap();
            assert!(v.per_node.values().all(|&x| x == 1.0), "{m}");
        }
    }

    #[test]
    fn exact_product_is_a_terminating_decimal() {
        let g = offline();
        let a: LeafAssignments<BigRational> = g.assignments().convert().unwrap();
        let v = propagate(&g, &a, Method::Product, &opts()).unwrap();
        let expected = BigRational::new(BigInt::from(1_741_824), BigInt::from(10_000_000));
        assert_eq!(v.top(&g), expected);
        let sod = propagate(&g, &a, Method::SumOfDoubts, &opts()).unwrap();
        assert_eq!(sod.raw_per_node[&id("C2.2.1")], BigRational::new(BigInt::from(-1), BigInt::from(2)));
    }

    #[test]
    fn f32_agrees_with_f64() {
        let g = offline();
        let a: LeafAssignments<f32> = g.assignments().convert().unwrap();
        let v = propagate(&g, &a, Method::Product, &opts()).unwrap();
        assert!((v.top(&g) - 0.174_182_4f32).abs() < 1e-6);
    }

    #[test]
    fn whatif_refutation_deltas() {
        let g = offline();
        let a = g.assignments();
        let one = |node: &str, v: f64| BTreeMap::from([(id(node), v)]);

        let d1 = whatif(&g, a, Method::Product, &one("E2.2.1.1", 0.85), &opts());
        assert!(matches!(d1, Err(ConfidenceError::UnknownOverride(_))));

        let d1 = whatif(&g, a, Method::Product, &one("C2.2.1.1", 0.85), &opts()).unwrap();
        assert!(close(d1.top, 0.246_758_4, 1e-12));
        assert!(close(d1.delta_top, 0.08, 1e-12));
        assert!(close(d1.raw_delta_top, 0.072_576, 1e-12));

        let d2 = whatif(&g, a, Method::Product, &one("C2.2.1.3", 0.9), &opts()).unwrap();
        assert!(close(d2.top, 0.195_955_2, 1e-12));
        assert!(close(d2.delta_top, 0.03, 1e-12));

        let raw = PropagationOptions { delta_decimals: None, ..opts() };
        let d2 = whatif(&g, a, Method::Product, &one("C2.2.1.3", 0.9), &raw).unwrap();
        assert!(close(d2.delta_top, 0.021_772_8, 1e-12));
    }

    #[test]
    fn whatif_without_overrides_is_identity() {
        let g = offline();
        for m in [Method::Product, Method::SumOfDoubts] {
            let w = whatif(&g, g.assignments(), m, &BTreeMap::new(), &opts()).unwrap();
            assert_eq!(w.delta_top, 0.0);
            assert_eq!(w.raw_delta_top, 0.0);
            assert_eq!(w.top, w.baseline_top);
        }
    }

    #[test]
    fn whatif_rejects_out_of_range_override() {
        let g = offline();
        let o = BTreeMap::from([(id("C2.2.1.1"), 1.5)]);
        let r = whatif(&g, g.assignments(), Method::Product, &o, &opts());
        assert!(matches!(r, Err(ConfidenceError::OutOfRange { .. })));
    }

    #[test]
    fn required_confidence() {
        let sod = uniform_required_confidence(0.95f64, 7, Method::SumOfDoubts);
        let prod = uniform_required_confidence(0.95f64, 7, Method::Product);
        assert!(close(sod, 0.992_857_142_857_142_9, 1e-12));
        assert!(close(prod, 0.992_699_168_020_985_3, 1e-12));
        assert!(sod > prod);
        for m in [Method::Product, Method::SumOfDoubts] {
            assert!(close(uniform_required_confidence(0.9, 1, m), 0.9, 1e-15));
        }
    }

    #[test]
    fn required_confidence_inverts_flat_conjunction() {
        for n in 1..=6u32 {
            for m in [Method::Product, Method::SumOfDoubts] {
                let x = uniform_required_confidence(0.9f64, n, m);
                let top = match m {
                    Method::Product => x.powi(n as i32),
                    Method::SumOfDoubts => n as f64 * x - (n as f64 - 1.0),
                };
                assert!(close(top, 0.9, 1e-12), "{m} n={n}");
            }
        }
    }

    fn adjusted(adjustment: PropagationAdjustment) -> ArgumentGraph {
        let mut doc = offline().to_document();
        let b = doc.blocks.iter_mut().find(|b| b.id == id("A2.2.1.2")).unwrap();
        b.adjustment = Some(adjustment);
        crate::build_graph(doc).unwrap()
    }

    #[test]
    fn factor_scales_before_clamping() {
        let g = adjusted(PropagationAdjustment { factor_f: 1.5, override_value: None });
        let v = propagate(&g, g.assignments(), Method::Product, &opts()).unwrap();
        assert!(close(v.raw_per_node[&id("C2.2.1.2")], 1.215, 1e-12));
        assert_eq!(v.per_node[&id("C2.2.1.2")], 1.0);
        assert_eq!(v.adjustments_applied.len(), 1);
        assert_eq!(v.adjustments_applied[0].factor_f, Some(1.5));
    }

    #[test]
    fn override_replaces_formula() {
        let g = adjusted(PropagationAdjustment { factor_f: 0.1, override_value: Some(0.5) });
        let v = propagate(&g, g.assignments(), Method::Product, &opts()).unwrap();
        assert_eq!(v.per_node[&id("C2.2.1.2")], 0.5);
        assert!(close(v.top(&g), 0.8 * 0.48 * 0.5 * 0.56, 1e-12));
        assert_eq!(v.adjustments_applied[0].override_value, Some(0.5));
        assert_eq!(v.adjustments_applied[0].factor_f, None);
    }

    #[test]
    fn missing_warrant() {
        let mut doc = offline().to_document();
        doc.blocks.iter_mut().find(|b| b.id == id("A2.2.1")).unwrap().warrant = None;
        doc.claims.retain(|c| c.id != id("W2.2.1"));
        doc.assignments.warrant_conf.remove(&id("W2.2.1"));
        let g = crate::build_graph(doc).unwrap();

        let r = propagate(&g, g.assignments(), Method::Product, &opts());
        assert_eq!(r.unwrap_err(), ConfidenceError::MissingWarrant(id("A2.2.1")));

        let allow = PropagationOptions { allow_missing_warrant: true, ..opts() };
        let v = propagate(&g, g.assignments(), Method::Product, &allow).unwrap();
        assert!(close(v.top(&g), 0.48 * 0.81 * 0.56, 1e-12));
        assert_eq!(v.warnings.len(), 1);
    }

    #[test]
    fn missing_assignment_is_reported() {
        let mut doc = offline().to_document();
        doc.assignments.posterior.remove(&id("C2.2.1.2"));
        let g = crate::build_graph(doc).unwrap();
        let r = propagate(&g, g.assignments(), Method::Product, &opts());
        assert!(matches!(r, Err(ConfidenceError::MissingAssignment { node, .. }) if node == id("C2.2.1.2")));
    }
}
