use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{
    ArgumentBlock, BlockKind, CaseDocument, CaseError, CaseMeta, Claim, Defeater, DefeaterStatus,
    Evidence, Likelihood, NodeId, ResidualDoubt,
};
use crate::confidence::LeafAssignments;

/// What a node id names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRole {
    Claim,
    SideClaim,
    Evidence,
    Block,
    Defeater,
    ResidualDoubt,
}

impl NodeRole {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeRole::Claim => "claim",
            NodeRole::SideClaim => "side-claim",
            NodeRole::Evidence => "evidence",
            NodeRole::Block => "block",
            NodeRole::Defeater => "defeater",
            NodeRole::ResidualDoubt => "residual doubt",
        }
    }
}

/// A validated, immutable assurance case.
///
/// Construction goes through [`build_graph`]; every mutation returns a new
/// graph and leaves the original untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgumentGraph {
    doc: CaseDocument,
    roles: BTreeMap<NodeId, NodeRole>,
    claim_ix: BTreeMap<NodeId, usize>,
    evidence_ix: BTreeMap<NodeId, usize>,
    block_ix: BTreeMap<NodeId, usize>,
    defeater_ix: BTreeMap<NodeId, usize>,
    /// claim -> the block supporting it
    support: BTreeMap<NodeId, NodeId>,
    /// node -> the node its validity feeds into (child/evidence/warrant ->
    /// block, block -> parent claim)
    upward: BTreeMap<NodeId, NodeId>,
    /// blocks, children before parents
    bottom_up: Vec<NodeId>,
}

/// Validates a case document and indexes it as a graph.
pub fn build_graph(doc: CaseDocument) -> Result<ArgumentGraph, CaseError> {
    let roles = collect_ids(&doc)?;
    check_ranges(&doc)?;
    check_references(&doc, &roles)?;
    let (support, upward) = check_attachments(&doc, &roles)?;
    check_acyclic(&doc, &support)?;
    check_top_claim(&doc, &upward)?;
    let bottom_up = check_reachability(&doc, &support)?;
    check_residual_doubts(&doc)?;

    let index = |ids: Vec<&NodeId>| -> BTreeMap<NodeId, usize> {
        ids.into_iter().cloned().enumerate().map(|(i, id)| (id, i)).collect()
    };
    Ok(ArgumentGraph {
        claim_ix: index(doc.claims.iter().map(|c| &c.id).collect()),
        evidence_ix: index(doc.evidence.iter().map(|e| &e.id).collect()),
        block_ix: index(doc.blocks.iter().map(|b| &b.id).collect()),
        defeater_ix: index(doc.defeaters.iter().map(|d| &d.id).collect()),
        doc,
        roles,
        support,
        upward,
        bottom_up,
    })
}

fn collect_ids(doc: &CaseDocument) -> Result<BTreeMap<NodeId, NodeRole>, CaseError> {
    let mut seen: BTreeMap<NodeId, (NodeRole, String)> = BTreeMap::new();
    let mut add = |id: &NodeId, role: NodeRole, path: String| -> Result<(), CaseError> {
        if let Some((_, first)) = seen.get(id) {
            return Err(CaseError::DuplicateId {
                id: id.to_string(),
                first: first.clone(),
                second: path,
            });
        }
        seen.insert(id.clone(), (role, path));
        Ok(())
    };
    for (i, c) in doc.claims.iter().enumerate() {
        let role = if c.is_side_claim { NodeRole::SideClaim } else { NodeRole::Claim };
        add(&c.id, role, format!("claims[{i}]"))?;
    }
    for (i, e) in doc.evidence.iter().enumerate() {
        add(&e.id, NodeRole::Evidence, format!("evidence[{i}]"))?;
    }
    for (i, b) in doc.blocks.iter().enumerate() {
        add(&b.id, NodeRole::Block, format!("blocks[{i}]"))?;
    }
    for (i, d) in doc.defeaters.iter().enumerate() {
        add(&d.id, NodeRole::Defeater, format!("defeaters[{i}]"))?;
    }
    for (i, r) in doc.residual_doubts.iter().enumerate() {
        add(&r.id, NodeRole::ResidualDoubt, format!("residual_doubts[{i}]"))?;
    }
    Ok(seen.into_iter().map(|(id, (role, _))| (id, role)).collect())
}

fn unit(path: impl FnOnce() -> String, value: f64) -> Result<(), CaseError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(CaseError::OutOfRange { path: path(), value, range: "[0, 1]" })
    }
}

fn check_ranges(doc: &CaseDocument) -> Result<(), CaseError> {
    for b in &doc.blocks {
        if let Some(adj) = &b.adjustment {
            if !(adj.factor_f.is_finite() && adj.factor_f > 0.0) {
                return Err(CaseError::OutOfRange {
                    path: format!("blocks[{}].adjustment.factor_f", b.id),
                    value: adj.factor_f,
                    range: "(0, inf)",
                });
            }
            if let Some(v) = adj.override_value {
                unit(|| format!("blocks[{}].adjustment.override", b.id), v)?;
            }
        }
    }
    for d in &doc.defeaters {
        if let Some(p) = d.prior_sustain_probability {
            unit(|| format!("defeaters[{}].prior_sustain_probability", d.id), p)?;
        }
        if let Some(e) = d.effort {
            if !(e > 0.0 && e <= 1.0) {
                return Err(CaseError::OutOfRange {
                    path: format!("defeaters[{}].effort", d.id),
                    value: e,
                    range: "(0, 1]",
                });
            }
        }
        for (node, v) in d.refuted_posterior.iter().flatten() {
            unit(|| format!("defeaters[{}].refuted_posterior[{node}]", d.id), *v)?;
        }
    }
    for r in &doc.residual_doubts {
        if let Some(Likelihood::Probability(p)) = r.likelihood {
            unit(|| format!("residual_doubts[{}].likelihood", r.id), p)?;
        }
    }
    let a = &doc.assignments;
    for (section, map) in [("posterior", &a.posterior), ("warrant_conf", &a.warrant_conf), ("prior", &a.prior)] {
        for (node, v) in map {
            unit(|| format!("assignments.{section}[{node}]"), *v)?;
        }
    }
    for (node, l) in &a.likelihoods {
        for (field, v) in l.fields() {
            if let Some(v) = v {
                unit(|| format!("assignments.likelihoods[{node}].{field}"), v)?;
            }
        }
    }
    Ok(())
}

fn expect_role(
    roles: &BTreeMap<NodeId, NodeRole>,
    id: &NodeId,
    path: impl Fn() -> String,
    allowed: &[NodeRole],
) -> Result<NodeRole, CaseError> {
    let role = *roles
        .get(id)
        .ok_or_else(|| CaseError::Dangling { id: id.to_string(), path: path() })?;
    if allowed.contains(&role) {
        return Ok(role);
    }
    if role == NodeRole::SideClaim && allowed.contains(&NodeRole::Claim) {
        return Err(CaseError::SideClaimMisuse { id: id.to_string(), path: path() });
    }
    Err(CaseError::WrongRole {
        id: id.to_string(),
        path: path(),
        expected: allowed.iter().map(|r| r.as_str()).collect::<Vec<_>>().join(" or "),
        found: role.as_str().to_string(),
    })
}

fn check_references(doc: &CaseDocument, roles: &BTreeMap<NodeId, NodeRole>) -> Result<(), CaseError> {
    expect_role(roles, &doc.case.top_claim, || "case.top_claim".into(), &[NodeRole::Claim])?;

    for b in &doc.blocks {
        expect_role(roles, &b.parent_claim, || format!("blocks[{}].parent_claim", b.id), &[NodeRole::Claim])?;
        let arity_ok = match b.kind {
            BlockKind::Decomposition => !b.children.is_empty(),
            BlockKind::Substitution | BlockKind::EvidenceIncorporation => b.children.len() == 1,
        };
        if !arity_ok {
            let need = match b.kind {
                BlockKind::Decomposition => "at least one sub-claim",
                BlockKind::Substitution => "exactly one sub-claim",
                BlockKind::EvidenceIncorporation => "exactly one evidence item",
            };
            return Err(CaseError::Arity {
                block: b.id.to_string(),
                message: format!("{} requires {need}, found {} children", b.kind, b.children.len()),
            });
        }
        let child_role = match b.kind {
            BlockKind::EvidenceIncorporation => NodeRole::Evidence,
            _ => NodeRole::Claim,
        };
        let mut seen = BTreeSet::new();
        for (i, child) in b.children.iter().enumerate() {
            expect_role(roles, child, || format!("blocks[{}].children[{i}]", b.id), &[child_role])?;
            if !seen.insert(child) {
                return Err(CaseError::Arity {
                    block: b.id.to_string(),
                    message: format!("child {child} listed twice"),
                });
            }
        }
        if let Some(w) = &b.warrant {
            expect_role(roles, w, || format!("blocks[{}].warrant", b.id), &[NodeRole::SideClaim])?;
        }
    }

    for d in &doc.defeaters {
        expect_role(
            roles,
            &d.target,
            || format!("defeaters[{}].target", d.id),
            &[NodeRole::Claim, NodeRole::SideClaim, NodeRole::Evidence, NodeRole::Block],
        )?;
        for node in d.refuted_posterior.iter().flat_map(|m| m.keys()) {
            expect_role(
                roles,
                node,
                || format!("defeaters[{}].refuted_posterior", d.id),
                &[NodeRole::Claim, NodeRole::SideClaim],
            )?;
        }
    }

    let a = &doc.assignments;
    for node in a.posterior.keys().chain(a.prior.keys()).chain(a.likelihoods.keys()) {
        expect_role(roles, node, || format!("assignments[{node}]"), &[NodeRole::Claim])?;
    }
    for node in a.warrant_conf.keys() {
        expect_role(roles, node, || format!("assignments.warrant_conf[{node}]"), &[NodeRole::SideClaim])?;
    }
    Ok(())
}

type Attachments = (BTreeMap<NodeId, NodeId>, BTreeMap<NodeId, NodeId>);

fn check_attachments(doc: &CaseDocument, roles: &BTreeMap<NodeId, NodeRole>) -> Result<Attachments, CaseError> {
    let mut supporters: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    let mut parents: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    let mut warranted: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    for b in &doc.blocks {
        supporters.entry(&b.parent_claim).or_default().push(&b.id);
        for c in &b.children {
            parents.entry(c).or_default().push(&b.id);
        }
        if let Some(w) = &b.warrant {
            warranted.entry(w).or_default().push(&b.id);
        }
    }
    let join = |ids: &[&NodeId]| ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", ");

    for c in &doc.claims {
        if let Some(blocks) = supporters.get(&c.id) {
            if blocks.len() > 1 {
                return Err(CaseError::MultipleSupport { claim: c.id.to_string(), blocks: join(blocks) });
            }
        }
        if let Some(blocks) = parents.get(&c.id) {
            if blocks.len() > 1 {
                return Err(CaseError::MultipleParents { node: c.id.to_string(), blocks: join(blocks) });
            }
        }
        if c.is_side_claim {
            let count = warranted.get(&c.id).map_or(0, Vec::len);
            if count != 1 {
                return Err(CaseError::SideClaimAttachment { id: c.id.to_string(), count });
            }
        }
    }
    for e in &doc.evidence {
        let count = parents.get(&e.id).map_or(0, Vec::len);
        if count != 1 {
            return Err(CaseError::EvidenceAttachment { id: e.id.to_string(), count });
        }
    }
    debug_assert!(warranted.keys().all(|w| roles.get(*w) == Some(&NodeRole::SideClaim)));

    let mut support = BTreeMap::new();
    let mut upward = BTreeMap::new();
    for b in &doc.blocks {
        support.insert(b.parent_claim.clone(), b.id.clone());
        upward.insert(b.id.clone(), b.parent_claim.clone());
        for c in b.children.iter().chain(b.warrant.iter()) {
            upward.insert(c.clone(), b.id.clone());
        }
    }
    Ok((support, upward))
}

fn check_acyclic(doc: &CaseDocument, support: &BTreeMap<NodeId, NodeId>) -> Result<(), CaseError> {
    let blocks: BTreeMap<&NodeId, &ArgumentBlock> = doc.blocks.iter().map(|b| (&b.id, b)).collect();
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: BTreeMap<&NodeId, Mark> = BTreeMap::new();

    // Iterative DFS over claims; the stack holds (claim, next child index).
    for start in doc.claims.iter().map(|c| &c.id) {
        if marks.contains_key(start) {
            continue;
        }
        let mut stack: Vec<(&NodeId, usize)> = vec![(start, 0)];
        marks.insert(start, Mark::Active);
        while let Some((claim, next)) = stack.last().copied() {
            let children: &[NodeId] = support
                .get(claim)
                .and_then(|b| blocks.get(b))
                .filter(|b| b.kind != BlockKind::EvidenceIncorporation)
                .map_or(&[], |b| &b.children);
            if next < children.len() {
                stack.last_mut().expect("non-empty").1 += 1;
                let child = &children[next];
                match marks.get(child) {
                    Some(Mark::Active) => {
                        let pos = stack.iter().position(|(c, _)| *c == child).expect("active on stack");
                        let mut path: Vec<String> = stack[pos..].iter().map(|(c, _)| c.to_string()).collect();
                        path.push(child.to_string());
                        return Err(CaseError::Cycle { path });
                    }
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(child, Mark::Active);
                        stack.push((child, 0));
                    }
                }
            } else {
                marks.insert(claim, Mark::Done);
                stack.pop();
            }
        }
    }
    Ok(())
}

fn check_top_claim(doc: &CaseDocument, upward: &BTreeMap<NodeId, NodeId>) -> Result<(), CaseError> {
    let flagged: Vec<&Claim> = doc.claims.iter().filter(|c| c.is_top_level).collect();
    if flagged.len() != 1 {
        return Err(CaseError::TopLevelCount { ids: flagged.iter().map(|c| c.id.to_string()).collect() });
    }
    let top = flagged[0];
    if top.id != doc.case.top_claim {
        return Err(CaseError::TopClaimMismatch {
            declared: doc.case.top_claim.to_string(),
            flagged: top.id.to_string(),
        });
    }
    if let Some(block) = upward.get(&top.id) {
        return Err(CaseError::TopClaimHasParent { id: top.id.to_string(), block: block.to_string() });
    }
    Ok(())
}

/// Walks down from the top claim; returns blocks in bottom-up order.
fn check_reachability(doc: &CaseDocument, support: &BTreeMap<NodeId, NodeId>) -> Result<Vec<NodeId>, CaseError> {
    let blocks: BTreeMap<&NodeId, &ArgumentBlock> = doc.blocks.iter().map(|b| (&b.id, b)).collect();
    let mut reached: BTreeSet<&NodeId> = BTreeSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([&doc.case.top_claim]);
    while let Some(claim) = queue.pop_front() {
        reached.insert(claim);
        let Some(block) = support.get(claim).and_then(|b| blocks.get(b)) else {
            continue;
        };
        reached.insert(&block.id);
        order.push(block.id.clone());
        for n in block.children.iter().chain(block.warrant.iter()) {
            reached.insert(n);
            if block.kind != BlockKind::EvidenceIncorporation {
                queue.push_back(n);
            }
        }
    }
    let all = doc
        .claims
        .iter()
        .map(|c| &c.id)
        .chain(doc.evidence.iter().map(|e| &e.id))
        .chain(doc.blocks.iter().map(|b| &b.id));
    for id in all {
        if !reached.contains(id) {
            return Err(CaseError::Unreachable { id: id.to_string() });
        }
    }
    // Breadth-first from the top visits parents first; reverse it.
    order.reverse();
    Ok(order)
}

fn check_residual_doubts(doc: &CaseDocument) -> Result<(), CaseError> {
    for r in doc.residual_doubts.iter().filter(|r| r.accepted) {
        let mut missing = Vec::new();
        if r.severity.is_none() {
            missing.push("severity");
        }
        if r.likelihood.is_none() {
            missing.push("likelihood");
        }
        if r.acceptance_rationale.as_deref().is_none_or(|s| s.trim().is_empty()) {
            missing.push("acceptance_rationale");
        }
        if !missing.is_empty() {
            return Err(CaseError::IncompleteResidualDoubt { id: r.id.to_string(), missing: missing.join(", ") });
        }
    }
    Ok(())
}

impl ArgumentGraph {
    pub fn from_json(text: &str) -> Result<Self, CaseError> {
        build_graph(CaseDocument::from_json(text)?)
    }

    /// The document this graph was built from, including any status changes
    /// made since.
    pub fn document(&self) -> &CaseDocument {
        &self.doc
    }

    pub fn to_document(&self) -> CaseDocument {
        self.doc.clone()
    }

    pub fn meta(&self) -> &CaseMeta {
        &self.doc.case
    }

    pub fn top_claim(&self) -> &Claim {
        self.claim(&self.doc.case.top_claim).expect("validated top claim")
    }

    pub fn role(&self, id: &NodeId) -> Option<NodeRole> {
        self.roles.get(id).copied()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = (&NodeId, NodeRole)> {
        self.roles.iter().map(|(id, role)| (id, *role))
    }

    pub fn claims(&self) -> &[Claim] {
        &self.doc.claims
    }

    pub fn claim(&self, id: &NodeId) -> Option<&Claim> {
        self.claim_ix.get(id).map(|&i| &self.doc.claims[i])
    }

    pub fn evidence(&self) -> &[Evidence] {
        &self.doc.evidence
    }

    pub fn evidence_item(&self, id: &NodeId) -> Option<&Evidence> {
        self.evidence_ix.get(id).map(|&i| &self.doc.evidence[i])
    }

    pub fn blocks(&self) -> &[ArgumentBlock] {
        &self.doc.blocks
    }

    pub fn block(&self, id: &NodeId) -> Option<&ArgumentBlock> {
        self.block_ix.get(id).map(|&i| &self.doc.blocks[i])
    }

    /// Blocks ordered so that every block comes after the blocks supporting
    /// its children.
    pub fn blocks_bottom_up(&self) -> impl Iterator<Item = &ArgumentBlock> {
        self.bottom_up.iter().map(|id| self.block(id).expect("indexed block"))
    }

    /// The block supporting `claim`, if any.
    pub fn support_of(&self, claim: &NodeId) -> Option<&ArgumentBlock> {
        self.support.get(claim).and_then(|b| self.block(b))
    }

    /// The node whose validity `id` feeds: the enclosing block for children,
    /// evidence and warrants; the parent claim for blocks.
    pub fn upward(&self, id: &NodeId) -> Option<&NodeId> {
        self.upward.get(id)
    }

    /// Walks from `id` up to the top claim, excluding `id` itself.
    pub fn ancestors(&self, id: &NodeId) -> Vec<&NodeId> {
        let mut out = Vec::new();
        let mut cur = id;
        while let Some(next) = self.upward.get(cur) {
            out.push(next);
            cur = next;
        }
        out
    }

    pub fn defeaters(&self) -> &[Defeater] {
        &self.doc.defeaters
    }

    pub fn defeater(&self, id: &NodeId) -> Option<&Defeater> {
        self.defeater_ix.get(id).map(|&i| &self.doc.defeaters[i])
    }

    pub fn residual_doubts(&self) -> &[ResidualDoubt] {
        &self.doc.residual_doubts
    }

    pub fn assignments(&self) -> &LeafAssignments<f64> {
        &self.doc.assignments
    }

    /// Claims grounded directly in evidence.
    pub fn leaf_claims(&self) -> impl Iterator<Item = &Claim> {
        self.doc.claims.iter().filter(|c| {
            self.support_of(&c.id)
                .is_some_and(|b| b.kind == BlockKind::EvidenceIncorporation)
        })
    }

    pub fn warrants(&self) -> impl Iterator<Item = &Claim> {
        self.doc.claims.iter().filter(|c| c.is_side_claim)
    }

    pub(crate) fn with_defeater_status(&self, id: &NodeId, status: DefeaterStatus) -> ArgumentGraph {
        let mut next = self.clone();
        let i = next.defeater_ix[id];
        next.doc.defeaters[i].status = status;
        next
    }

    /// Returns a copy with replaced leaf assignments, validated like a fresh
    /// document.
    pub fn with_assignments(&self, assignments: LeafAssignments<f64>) -> Result<ArgumentGraph, CaseError> {
        let mut doc = self.doc.clone();
        doc.assignments = assignments;
        build_graph(doc)
    }
}
