use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CandidateId, NodeId, SocialGraph};
use crate::money::Money;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolutionError {
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("candidate edge {0:?} does not exist")]
    UnknownEdge(CandidateId),
    #[error("edge {0:?} leaves a node that is not a seed")]
    SourceNotSeed(CandidateId),
    #[error("recorded cost {recorded} differs from actual cost {actual}")]
    CostMismatch { recorded: Money, actual: Money },
    #[error("cost {cost} exceeds budget {budget}")]
    OverBudget { cost: Money, budget: Money },
}

/// A seed set together with the candidate edges bought for it.
///
/// Every bought edge leaves a seed, and `cost` is always `|seeds| + sum of edge costs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Solution {
    seeds: BTreeSet<NodeId>,
    edges: BTreeSet<CandidateId>,
    cost: Money,
}

impl Solution {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new<F: Scalar>(
        graph: &SocialGraph<F>,
        seeds: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = CandidateId>,
    ) -> Result<Self, SolutionError> {
        let seeds: BTreeSet<NodeId> = seeds.into_iter().collect();
        let edges: BTreeSet<CandidateId> = edges.into_iter().collect();
        let cost = check_structure(graph, &seeds, &edges)?;
        Ok(Solution { seeds, edges, cost })
    }

    pub fn seeds(&self) -> &BTreeSet<NodeId> {
        &self.seeds
    }

    pub fn edges(&self) -> &BTreeSet<CandidateId> {
        &self.edges
    }

    pub fn cost(&self) -> Money {
        self.cost
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty() && self.edges.is_empty()
    }

    /// `|A| + |S|`.
    pub fn size(&self) -> usize {
        self.seeds.len() + self.edges.len()
    }

    /// True when `other` is nested inside `self` (seeds and edges both subsets).
    pub fn contains(&self, other: &Solution) -> bool {
        other.seeds.is_subset(&self.seeds) && other.edges.is_subset(&self.edges)
    }

    /// Re-checks every invariant against `graph` and the budget.
    pub fn validate<F: Scalar>(
        &self,
        graph: &SocialGraph<F>,
        budget: Money,
    ) -> Result<(), SolutionError> {
        let actual = check_structure(graph, &self.seeds, &self.edges)?;
        if actual != self.cost {
            return Err(SolutionError::CostMismatch {
                recorded: self.cost,
                actual,
            });
        }
        if actual > budget {
            return Err(SolutionError::OverBudget {
                cost: actual,
                budget,
            });
        }
        Ok(())
    }

    pub(crate) fn with_seed(&self, seed: NodeId) -> Solution {
        let mut next = self.clone();
        if next.seeds.insert(seed) {
            next.cost += Money::ONE;
        }
        next
    }

    /// Adds `seed` (if any) and `edges`; every edge must leave a seed of the result.
    pub(crate) fn extended<F: Scalar>(
        &self,
        graph: &SocialGraph<F>,
        seed: Option<NodeId>,
        edges: &[CandidateId],
    ) -> Solution {
        let mut next = match seed {
            Some(a) => self.with_seed(a),
            None => self.clone(),
        };
        for &e in edges {
            debug_assert!(next.seeds.contains(&graph.candidate(e).source));
            if next.edges.insert(e) {
                next.cost += graph.candidate(e).cost;
            }
        }
        next
    }
}

fn check_structure<F: Scalar>(
    graph: &SocialGraph<F>,
    seeds: &BTreeSet<NodeId>,
    edges: &BTreeSet<CandidateId>,
) -> Result<Money, SolutionError> {
    if let Some(&bad) = seeds.iter().find(|a| a.index() >= graph.node_count()) {
        return Err(SolutionError::UnknownNode(bad));
    }
    for &e in edges {
        if e.index() >= graph.candidates().len() {
            return Err(SolutionError::UnknownEdge(e));
        }
        if !seeds.contains(&graph.candidate(e).source) {
            return Err(SolutionError::SourceNotSeed(e));
        }
    }
    Ok(graph.solution_cost(seeds.len(), edges))
}
