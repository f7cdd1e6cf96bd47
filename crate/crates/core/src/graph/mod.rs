//! The social network, its purchasable candidate edges, and feasible solutions.

mod io;
mod solution;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::Money;
use crate::scalar::Scalar;

pub use io::{
    load_graph, write_candidate_list, write_edge_list, CandidateGenerator, CandidateSpec,
    LoadOptions,
};
pub use solution::{Solution, SolutionError};

/// Dense node identifier in `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index into the candidate-edge universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateId(pub u32);

impl CandidateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Identifier shared by existing and candidate edges.
///
/// Existing edge `i` has key `i`; candidate `j` has key `existing_count + j`.
/// Coin flips are keyed by this value, so it is stable for the lifetime of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey(pub u32);

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<F> {
    pub source: NodeId,
    pub target: NodeId,
    pub p: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEdge<F> {
    pub source: NodeId,
    pub target: NodeId,
    pub p: F,
    pub cost: Money,
}

/// Outgoing arc of the existing graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc<F> {
    pub target: NodeId,
    pub key: EdgeKey,
    pub p: F,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvalidGraph {
    #[error("{0}")]
    Parse(String),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("cost {0} outside [0, 1]")]
    CostOutOfRange(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("candidate edge {0} -> {1} already exists in the graph")]
    CandidateCollision(String, String),
    #[error("self-loop on {0}")]
    SelfLoop(String),
    #[error("node id {0} out of range")]
    UnknownNode(u32),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("{file} line {line}: {kind}")]
    Line {
        file: &'static str,
        line: usize,
        kind: InvalidGraph,
    },
    #[error(transparent)]
    Invalid(#[from] InvalidGraph),
    #[error("candidate generator config: {0}")]
    Generator(String),
}

/// Directed graph with propagation probabilities and a universe of purchasable edges.
///
/// Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialGraph<F> {
    labels: Vec<String>,
    label_index: HashMap<String, NodeId>,
    edges: Vec<Edge<F>>,
    candidates: Vec<CandidateEdge<F>>,
    out: Vec<Vec<Arc<F>>>,
    candidates_from: Vec<Vec<CandidateId>>,
}

impl<F: Scalar> SocialGraph<F> {
    pub fn builder() -> GraphBuilder<F> {
        GraphBuilder::new()
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.labels.len() as u32).map(NodeId)
    }

    pub fn label(&self, node: NodeId) -> &str {
        &self.labels[node.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.label_index.get(label).copied()
    }

    pub fn edges(&self) -> &[Edge<F>] {
        &self.edges
    }

    pub fn candidates(&self) -> &[CandidateEdge<F>] {
        &self.candidates
    }

    pub fn candidate(&self, id: CandidateId) -> &CandidateEdge<F> {
        &self.candidates[id.index()]
    }

    pub fn candidate_ids(&self) -> impl Iterator<Item = CandidateId> + '_ {
        (0..self.candidates.len() as u32).map(CandidateId)
    }

    pub fn out_arcs(&self, node: NodeId) -> &[Arc<F>] {
        &self.out[node.index()]
    }

    /// Candidate edges whose source is `node`, in id order.
    pub fn candidates_from(&self, node: NodeId) -> &[CandidateId] {
        &self.candidates_from[node.index()]
    }

    pub fn candidate_key(&self, id: CandidateId) -> EdgeKey {
        EdgeKey((self.edges.len() + id.index()) as u32)
    }

    /// Total number of edge keys (existing plus candidate).
    pub fn key_count(&self) -> usize {
        self.edges.len() + self.candidates.len()
    }

    /// `|A| + sum of bought edge costs`.
    pub fn solution_cost<'a>(
        &self,
        seed_count: usize,
        bought: impl IntoIterator<Item = &'a CandidateId>,
    ) -> Money {
        Money::from_units(seed_count as i64)
            + bought.into_iter().map(|&e| self.candidate(e).cost).sum()
    }

    /// Minimum candidate-edge cost, `None` when no candidates exist.
    pub fn c_min(&self) -> Option<Money> {
        self.candidates.iter().map(|c| c.cost).min()
    }
}

/// Incremental constructor that enforces the graph invariants.
#[derive(Debug, Clone)]
pub struct GraphBuilder<F> {
    labels: Vec<String>,
    label_index: HashMap<String, NodeId>,
    edges: Vec<Edge<F>>,
    candidates: Vec<CandidateEdge<F>>,
    existing_pairs: HashSet<(NodeId, NodeId)>,
    candidate_pairs: HashSet<(NodeId, NodeId)>,
}

impl<F: Scalar> Default for GraphBuilder<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar> GraphBuilder<F> {
    pub fn new() -> Self {
        GraphBuilder {
            labels: Vec::new(),
            label_index: HashMap::new(),
            edges: Vec::new(),
            candidates: Vec::new(),
            existing_pairs: HashSet::new(),
            candidate_pairs: HashSet::new(),
        }
    }

    /// Builder pre-populated with nodes labelled `"0"` through `"n-1"`.
    pub fn with_nodes(n: usize) -> Self {
        let mut builder = Self::new();
        for i in 0..n {
            builder.node(&i.to_string());
        }
        builder
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Returns the id for `label`, creating the node on first sight.
    pub fn node(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.label_index.get(label) {
            return id;
        }
        let id = NodeId(self.labels.len() as u32);
        self.labels.push(label.to_string());
        self.label_index.insert(label.to_string(), id);
        id
    }

    pub fn has_edge(&self, source: NodeId, target: NodeId) -> bool {
        self.existing_pairs.contains(&(source, target))
    }

    fn check_pair(&self, source: NodeId, target: NodeId) -> Result<(), InvalidGraph> {
        for id in [source, target] {
            if id.index() >= self.labels.len() {
                return Err(InvalidGraph::UnknownNode(id.0));
            }
        }
        if source == target {
            return Err(InvalidGraph::SelfLoop(self.labels[source.index()].clone()));
        }
        Ok(())
    }

    fn pair_labels(&self, source: NodeId, target: NodeId) -> (String, String) {
        (
            self.labels[source.index()].clone(),
            self.labels[target.index()].clone(),
        )
    }

    pub fn edge(&mut self, source: NodeId, target: NodeId, p: F) -> Result<(), InvalidGraph> {
        self.check_pair(source, target)?;
        check_probability(p)?;
        if self.existing_pairs.contains(&(source, target)) {
            let (s, t) = self.pair_labels(source, target);
            return Err(InvalidGraph::DuplicateEdge(s, t));
        }
        if self.candidate_pairs.contains(&(source, target)) {
            let (s, t) = self.pair_labels(source, target);
            return Err(InvalidGraph::CandidateCollision(s, t));
        }
        self.existing_pairs.insert((source, target));
        self.edges.push(Edge { source, target, p });
        Ok(())
    }

    pub fn candidate(
        &mut self,
        source: NodeId,
        target: NodeId,
        p: F,
        cost: Money,
    ) -> Result<CandidateId, InvalidGraph> {
        self.check_pair(source, target)?;
        check_probability(p)?;
        if cost < Money::ZERO || cost > Money::ONE {
            return Err(InvalidGraph::CostOutOfRange(cost.to_string()));
        }
        if self.candidate_pairs.contains(&(source, target)) {
            let (s, t) = self.pair_labels(source, target);
            return Err(InvalidGraph::DuplicateEdge(s, t));
        }
        if self.existing_pairs.contains(&(source, target)) {
            let (s, t) = self.pair_labels(source, target);
            return Err(InvalidGraph::CandidateCollision(s, t));
        }
        self.candidate_pairs.insert((source, target));
        let id = CandidateId(self.candidates.len() as u32);
        self.candidates.push(CandidateEdge {
            source,
            target,
            p,
            cost,
        });
        Ok(id)
    }

    pub fn build(self) -> SocialGraph<F> {
        let n = self.labels.len();
        let mut out = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.source.index()].push(Arc {
                target: e.target,
                key: EdgeKey(i as u32),
                p: e.p,
            });
        }
        let mut candidates_from = vec![Vec::new(); n];
        for (j, c) in self.candidates.iter().enumerate() {
            candidates_from[c.source.index()].push(CandidateId(j as u32));
        }
        SocialGraph {
            labels: self.labels,
            label_index: self.label_index,
            edges: self.edges,
            candidates: self.candidates,
            out,
            candidates_from,
        }
    }
}

fn check_probability<F: Scalar>(p: F) -> Result<(), InvalidGraph> {
    if p.is_finite() && p >= F::zero() && p <= F::one() {
        Ok(())
    } else {
        Err(InvalidGraph::ProbabilityOutOfRange(p.as_f64()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn money(s: &str) -> Money {
        s.parse().unwrap()
    }

    #[test]
    fn builder_rejects_invalid_edges() {
        let mut b = GraphBuilder::<f64>::with_nodes(3);
        b.edge(NodeId(0), NodeId(1), 0.5).unwrap();
        assert!(matches!(
            b.edge(NodeId(0), NodeId(1), 0.2),
            Err(InvalidGraph::DuplicateEdge(..))
        ));
        assert!(matches!(
            b.edge(NodeId(1), NodeId(1), 0.2),
            Err(InvalidGraph::SelfLoop(_))
        ));
        assert!(matches!(
            b.edge(NodeId(1), NodeId(2), 1.5),
            Err(InvalidGraph::ProbabilityOutOfRange(_))
        ));
        assert!(matches!(
            b.candidate(NodeId(0), NodeId(1), 0.5, money("0.5")),
            Err(InvalidGraph::CandidateCollision(..))
        ));
        assert!(matches!(
            b.candidate(NodeId(1), NodeId(2), 0.5, money("1.5")),
            Err(InvalidGraph::CostOutOfRange(_))
        ));
        assert!(matches!(
            b.edge(NodeId(0), NodeId(7), 0.5),
            Err(InvalidGraph::UnknownNode(7))
        ));
        b.candidate(NodeId(1), NodeId(2), 0.5, money("0.3")).unwrap();
        assert!(matches!(
            b.edge(NodeId(1), NodeId(2), 0.5),
            Err(InvalidGraph::CandidateCollision(..))
        ));
    }

    #[test]
    fn edge_keys_follow_existing_edges() {
        let mut b = GraphBuilder::<f64>::with_nodes(3);
        b.edge(NodeId(0), NodeId(1), 0.5).unwrap();
        b.edge(NodeId(1), NodeId(2), 0.5).unwrap();
        let c = b.candidate(NodeId(0), NodeId(2), 1.0, money("0.1")).unwrap();
        let g = b.build();
        assert_eq!(g.candidate_key(c), EdgeKey(2));
        assert_eq!(g.key_count(), 3);
        assert_eq!(g.out_arcs(NodeId(0)).len(), 1);
        assert_eq!(g.candidates_from(NodeId(0)), &[c]);
    }

    #[test]
    fn c_min_over_candidates() {
        let mut b = GraphBuilder::<f64>::with_nodes(3);
        b.candidate(NodeId(0), NodeId(1), 0.5, money("0.5")).unwrap();
        b.candidate(NodeId(0), NodeId(2), 0.5, money("0.3")).unwrap();
        assert_eq!(b.build().c_min(), Some(money("0.3")));

        let mut b = GraphBuilder::<f64>::with_nodes(2);
        b.candidate(NodeId(0), NodeId(1), 0.5, Money::ONE).unwrap();
        b.candidate(NodeId(1), NodeId(0), 0.5, Money::ONE).unwrap();
        assert_eq!(b.build().c_min(), Some(Money::ONE));

        assert_eq!(GraphBuilder::<f64>::with_nodes(2).build().c_min(), None);
    }

    #[test]
    fn solution_cost_sums_seeds_and_edges() {
        let mut b = GraphBuilder::<f64>::with_nodes(4);
        let e1 = b.candidate(NodeId(0), NodeId(1), 0.5, money("0.1")).unwrap();
        let e2 = b.candidate(NodeId(0), NodeId(2), 0.5, money("0.2")).unwrap();
        let e3 = b.candidate(NodeId(0), NodeId(3), 0.5, money("0.7")).unwrap();
        let g = b.build();
        assert_eq!(g.solution_cost(1, &[e1, e2, e3]), money("2.000000"));
        assert_eq!(g.solution_cost(0, &[]), Money::ZERO);
        assert_eq!(g.solution_cost(2, &[e3]), money("2.7"));
    }
}
