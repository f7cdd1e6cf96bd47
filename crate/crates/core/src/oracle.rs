//! Exhaustive optimal solver for small instances.
//!
//! Enumerates every feasible `(A, S)` and scores it with exact spread. Only
//! meant for checking approximation ratios on desk-scale graphs.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CandidateId, NodeId, SocialGraph, Solution, SolutionError};
use crate::icm::{sigma_exact, SpreadError};
use crate::money::Money;
use crate::scalar::Scalar;

pub const ORACLE_NODE_LIMIT: usize = 6;
pub const ORACLE_EDGE_LIMIT: usize = 10;

/// Uncertain-edge limit handed to the exact evaluator; never binding within the node limit.
const ORACLE_EXACT_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{count} nodes exceed the oracle limit of {limit}")]
    TooManyNodes { count: usize, limit: usize },
    #[error("{count} candidate edges exceed the oracle limit of {limit}")]
    TooManyCandidates { count: usize, limit: usize },
    #[error(transparent)]
    Spread(#[from] SpreadError),
    #[error(transparent)]
    InvalidSeeds(#[from] SolutionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub nodes: usize,
    pub edges: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            nodes: ORACLE_NODE_LIMIT,
            edges: ORACLE_EDGE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult<F> {
    pub best: Solution,
    pub value: F,
    /// Feasible solutions scored.
    pub explored: u64,
}

/// Orders by value, then prefers the lexicographically smaller `(seeds, edges)`.
fn better<F: Scalar>(a: &OracleResult<F>, b: &OracleResult<F>) -> bool {
    match a.value.partial_cmp(&b.value) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Less) => false,
        _ => {
            let key = |r: &OracleResult<F>| {
                (
                    r.best.seeds().iter().copied().collect::<Vec<_>>(),
                    r.best.edges().iter().copied().collect::<Vec<_>>(),
                )
            };
            key(a) < key(b)
        }
    }
}

fn merge<F: Scalar>(a: OracleResult<F>, b: OracleResult<F>) -> OracleResult<F> {
    let explored = a.explored + b.explored;
    let mut win = if better(&b, &a) { b } else { a };
    win.explored = explored;
    win
}

/// Best edge subset of `pool` added to `base` within total cost `budget`.
fn best_edge_subset<F: Scalar>(
    graph: &SocialGraph<F>,
    base: &Solution,
    pool: &[CandidateId],
    budget: Money,
) -> Result<OracleResult<F>, OracleError> {
    let mut best: Option<OracleResult<F>> = None;
    let mut chosen: Vec<CandidateId> = Vec::new();
    // Depth-first over inclusion choices in pool order.
    #[allow(clippy::too_many_arguments)]
    fn visit<F: Scalar>(
        graph: &SocialGraph<F>,
        base: &Solution,
        pool: &[CandidateId],
        budget: Money,
        from: usize,
        cost: Money,
        chosen: &mut Vec<CandidateId>,
        best: &mut Option<OracleResult<F>>,
    ) -> Result<(), OracleError> {
        let sol = Solution::new(graph, base.seeds().iter().copied(), chosen.iter().copied())?;
        debug_assert_eq!(sol.cost(), cost);
        let value = sigma_exact(graph, &sol, ORACLE_EXACT_LIMIT)?.value;
        let here = OracleResult {
            best: sol,
            value,
            explored: 1,
        };
        *best = Some(match best.take() {
            None => here,
            Some(b) => merge(b, here),
        });
        for i in from..pool.len() {
            let next = cost + graph.candidate(pool[i]).cost;
            if next > budget {
                continue;
            }
            chosen.push(pool[i]);
            visit(graph, base, pool, budget, i + 1, next, chosen, best)?;
            chosen.pop();
        }
        Ok(())
    }
    visit(graph, base, pool, budget, 0, base.cost(), &mut chosen, &mut best)?;
    Ok(best.expect("the base itself is scored"))
}

fn check_limits<F: Scalar>(graph: &SocialGraph<F>, limits: OracleLimits) -> Result<(), OracleError> {
    if graph.node_count() > limits.nodes {
        return Err(OracleError::TooManyNodes {
            count: graph.node_count(),
            limit: limits.nodes,
        });
    }
    if graph.candidates().len() > limits.edges {
        return Err(OracleError::TooManyCandidates {
            count: graph.candidates().len(),
            limit: limits.edges,
        });
    }
    Ok(())
}

/// Optimal solution within `budget` using the default size limits.
pub fn brute_force_bima<F: Scalar>(
    graph: &SocialGraph<F>,
    budget: Money,
) -> Result<OracleResult<F>, OracleError> {
    brute_force_bima_with(graph, budget, OracleLimits::default())
}

pub fn brute_force_bima_with<F: Scalar>(
    graph: &SocialGraph<F>,
    budget: Money,
    limits: OracleLimits,
) -> Result<OracleResult<F>, OracleError> {
    check_limits(graph, limits)?;
    let n = graph.node_count() as u32;
    let max_seeds = budget.whole_units().max(0) as u32;
    let seed_sets: Vec<u64> = (0u64..1 << n)
        .filter(|mask| mask.count_ones() <= max_seeds)
        .collect();
    let per_set: Vec<OracleResult<F>> = seed_sets
        .par_iter()
        .map(|&mask| {
            let seeds: Vec<NodeId> = (0..n).filter(|i| mask >> i & 1 == 1).map(NodeId).collect();
            let base = Solution::new(graph, seeds.iter().copied(), [])?;
            let pool: Vec<CandidateId> = graph
                .candidate_ids()
                .filter(|&e| mask >> graph.candidate(e).source.0 & 1 == 1)
                .collect();
            best_edge_subset(graph, &base, &pool, budget)
        })
        .collect::<Result<_, _>>()?;
    Ok(per_set.into_iter().reduce(merge).expect("the empty seed set is always feasible"))
}

/// Optimal edge purchase for the fixed `seeds` within `budget` (edge costs only).
pub fn brute_force_costima<F: Scalar>(
    graph: &SocialGraph<F>,
    seeds: &BTreeSet<NodeId>,
    budget: Money,
) -> Result<OracleResult<F>, OracleError> {
    let base = Solution::new(graph, seeds.iter().copied(), [])?;
    let pool: Vec<CandidateId> = graph
        .candidate_ids()
        .filter(|&e| seeds.contains(&graph.candidate(e).source))
        .collect();
    if pool.len() > ORACLE_EDGE_LIMIT {
        return Err(OracleError::TooManyCandidates {
            count: pool.len(),
            limit: ORACLE_EDGE_LIMIT,
        });
    }
    best_edge_subset(graph, &base, &pool, base.cost() + budget)
}
