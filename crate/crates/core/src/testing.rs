//! Random valid cases for property tests.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::argument::{
    id, ArgumentBlock, BlockKind, CaseDocument, CaseMeta, Claim, Defeater, DefeaterClass, DefeaterProvenance,
    DefeaterStatus, DefeaterType, Evidence, NodeId,
};
use crate::confidence::LeafAssignments;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    /// Upper bound on claims, side-claims, evidence and blocks together.
    pub max_nodes: usize,
    pub max_defeaters: usize,
    /// Leaves without an evidence block.
    pub unsupported_leaves: bool,
    /// Substitution blocks in addition to decompositions.
    pub substitutions: bool,
    /// Probability that a block carries a warrant. Decompositions and
    /// substitutions always get one when this is 1.
    pub warrant_rate: f64,
    /// Range of assigned probabilities.
    pub assignment_range: (f64, f64),
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_nodes: 30,
            max_defeaters: 4,
            unsupported_leaves: true,
            substitutions: true,
            warrant_rate: 1.0,
            assignment_range: (0.0, 1.0),
        }
    }
}

struct Builder<'a, R: Rng> {
    rng: &'a mut R,
    cfg: GenConfig,
    doc: CaseDocument,
    nodes: usize,
    /// Claims created but not yet expanded; each reserves an evidence
    /// item and a block.
    pending: usize,
    next: usize,
}

impl<R: Rng> Builder<'_, R> {
    fn fresh(&mut self, prefix: &str) -> NodeId {
        self.next += 1;
        id(&format!("{prefix}{}", self.next))
    }

    fn value(&mut self) -> f64 {
        let (lo, hi) = self.cfg.assignment_range;
        if lo == hi {
            lo
        } else {
            self.rng.random_range(lo..=hi)
        }
    }

    fn claim(&mut self, side: bool) -> NodeId {
        let c = self.fresh(if side { "W" } else { "C" });
        self.doc.claims.push(Claim {
            id: c.clone(),
            statement: format!("statement of {c}"),
            is_top_level: false,
            is_side_claim: side,
        });
        self.nodes += 1;
        if side {
            let v = self.value();
            self.doc.assignments.warrant_conf.insert(c.clone(), v);
        }
        c
    }

    fn available(&self) -> usize {
        self.cfg.max_nodes.saturating_sub(self.nodes + 2 * self.pending)
    }

    fn warrant(&mut self, required: bool) -> Option<NodeId> {
        if self.available() == 0 {
            return None;
        }
        let p = if required { self.cfg.warrant_rate } else { self.cfg.warrant_rate * 0.5 };
        self.rng.random_bool(p.clamp(0.0, 1.0)).then(|| self.claim(true))
    }

    fn block(&mut self, kind: BlockKind, parent: &NodeId, children: Vec<NodeId>, warrant: Option<NodeId>) {
        let b = self.fresh("A");
        self.nodes += 1;
        self.doc.blocks.push(ArgumentBlock {
            id: b,
            kind,
            parent_claim: parent.clone(),
            children,
            warrant,
            adjustment: None,
            comment: None,
        });
    }

    fn evidence_leaf(&mut self, claim: &NodeId) {
        let e = self.fresh("E");
        self.doc.evidence.push(Evidence { id: e.clone(), description: format!("evidence {e}"), provenance: String::new() });
        self.nodes += 1;
        let v = self.value();
        self.doc.assignments.posterior.insert(claim.clone(), v);
        self.nodes += 1;
        let w = self.warrant(false);
        self.nodes -= 1;
        self.block(BlockKind::EvidenceIncorporation, claim, vec![e], w);
    }

    fn expand(&mut self, claim: NodeId, depth: usize) {
        self.pending -= 1;
        // Block, warrant and k children, each child reserving 2 more.
        let avail = self.available();
        let fits = |k: usize| avail >= 2 + 3 * k;
        let choice = self.rng.random_range(0..10);
        if depth < 6 && fits(2) && choice < 4 {
            let k = if fits(3) { self.rng.random_range(2..=3) } else { 2 };
            self.pending += k;
            let w = self.warrant(true);
            let children: Vec<NodeId> = (0..k).map(|_| self.claim(false)).collect();
            self.block(BlockKind::Decomposition, &claim, children.clone(), w);
            for c in children {
                self.expand(c, depth + 1);
            }
        } else if depth < 6 && fits(1) && self.cfg.substitutions && choice < 5 {
            self.pending += 1;
            let w = self.warrant(true);
            let child = self.claim(false);
            self.block(BlockKind::Substitution, &claim, vec![child.clone()], w);
            self.expand(child, depth + 1);
        } else if self.cfg.unsupported_leaves && choice == 9 {
            let v = self.value();
            self.doc.assignments.posterior.insert(claim, v);
        } else {
            self.evidence_leaf(&claim);
        }
    }

    fn defeaters(&mut self) {
        let targets: Vec<NodeId> = self
            .doc
            .claims
            .iter()
            .map(|c| c.id.clone())
            .chain(self.doc.evidence.iter().map(|e| e.id.clone()))
            .chain(self.doc.blocks.iter().map(|b| b.id.clone()))
            .collect();
        let n = self.rng.random_range(0..=self.cfg.max_defeaters);
        for _ in 0..n {
            let d = self.fresh("D");
            let target = targets.choose(self.rng).expect("a case has a top claim").clone();
            let defeater_type =
                *[DefeaterType::Rebutting, DefeaterType::Undermining, DefeaterType::Undercutting].choose(self.rng).unwrap();
            let class = *[DefeaterClass::Exploratory, DefeaterClass::Exact].choose(self.rng).unwrap();
            let status =
                *[DefeaterStatus::Unresolved, DefeaterStatus::Sustained, DefeaterStatus::Refuted].choose(self.rng).unwrap();
            self.doc.defeaters.push(Defeater {
                id: d.clone(),
                text: format!("doubt {d}"),
                target,
                defeater_type,
                class,
                status,
                provenance: DefeaterProvenance::TeamInternal,
                prior_sustain_probability: None,
                effort: None,
                refuted_posterior: None,
                requires_restructuring: false,
                challenges_reasoning_step: false,
            });
        }
    }
}

/// A valid case: a tree of claims rooted at `C0`, every block warranted
/// according to `cfg.warrant_rate`, every leaf assigned.
pub fn random_case<R: Rng>(rng: &mut R, cfg: &GenConfig) -> CaseDocument {
    let doc = CaseDocument {
        case: CaseMeta { id: "random".into(), title: "random case".into(), top_claim: id("C0") },
        claims: vec![Claim { id: id("C0"), statement: "top".into(), is_top_level: true, is_side_claim: false }],
        evidence: Vec::new(),
        blocks: Vec::new(),
        defeaters: Vec::new(),
        residual_doubts: Vec::new(),
        assignments: LeafAssignments::default(),
    };
    let mut b = Builder { rng, cfg: *cfg, doc, nodes: 1, pending: 1, next: 0 };
    b.expand(id("C0"), 0);
    b.defeaters();
    b.doc
}

/// Node count as bounded by [`GenConfig::max_nodes`].
pub fn node_count(doc: &CaseDocument) -> usize {
    doc.claims.len() + doc.evidence.len() + doc.blocks.len()
}
