//! Greedy approximation algorithms for budgeted seed-and-edge selection.
//!
//! All solvers share the same move vocabulary: a move extends the current
//! solution by a seed, an edge leaving an existing seed, a seed with one edge,
//! or a seed with a bundle of cheap edges. Moves are ranked by marginal gain
//! divided by marginal cost.

mod general;
mod lowerbound;

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{CandidateId, NodeId, SocialGraph, Solution, SolutionError};
use crate::icm::{SpreadError, SpreadEvaluator};
use crate::money::Money;
use crate::scalar::{self, Scalar};

pub use general::{costima_greedy, greedy_general, rbima_solve, ThresholdConfig};
pub use lowerbound::{
    enum_greedy, greedy_lb, greedy_lb_restricted, greedy_seed_only, GreedyOptions,
    DEFAULT_ENUMERATION_CAP,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Spread(#[from] SpreadError),
    #[error(transparent)]
    InvalidSolution(#[from] SolutionError),
    #[error("enumerating prefixes of size {size} over {elements} elements ({count} combinations) exceeds the cap of {cap}")]
    EnumerationCap {
        size: usize,
        elements: usize,
        count: u128,
        cap: u128,
    },
    #[error("threshold b = {0} must be positive and finite")]
    InvalidThreshold(f64),
    #[error("prefix size M must be at least 1")]
    InvalidPrefixSize,
    #[error("warm start costs {cost}, more than the budget {budget}")]
    WarmStartOverBudget { cost: Money, budget: Money },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MoveKind {
    Seed,
    Edge,
    SeedPlusEdge,
    SeedPlusBundle,
}

/// One way to extend the current solution, with its estimated marginal gain.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateMove<F> {
    pub kind: MoveKind,
    pub seed: Option<NodeId>,
    pub edges: Vec<CandidateId>,
    pub gain: F,
    pub marginal_cost: Money,
}

impl<F: Scalar> CandidateMove<F> {
    /// `gain / marginal_cost`; infinite for zero-cost moves.
    pub fn ratio(&self) -> F {
        if self.marginal_cost == Money::ZERO {
            F::infinity()
        } else {
            self.gain / F::of(self.marginal_cost.to_f64())
        }
    }

    fn key(&self) -> MoveKey {
        MoveKey {
            kind: self.kind,
            seed: self.seed,
            edges: self.edges.clone(),
        }
    }
}

/// Ranking used by every argmax: higher ratio (zero-cost moves ranked by raw
/// gain, above all finite ratios), then lower marginal cost, then the
/// lexicographically smaller `(seed, edges)`, then move kind.
/// `Ordering::Greater` means `a` is preferred.
pub fn compare_moves<F: Scalar>(a: &CandidateMove<F>, b: &CandidateMove<F>) -> Ordering {
    let (ra, rb) = (a.ratio(), b.ratio());
    let by_ratio = if ra.is_infinite() && rb.is_infinite() {
        scalar::cmp(a.gain, b.gain)
    } else {
        scalar::cmp(ra, rb)
    };
    by_ratio
        .then_with(|| b.marginal_cost.cmp(&a.marginal_cost))
        .then_with(|| (&b.seed, &b.edges).cmp(&(&a.seed, &a.edges)))
        .then_with(|| b.kind.cmp(&a.kind))
}

fn best_move<F: Scalar>(moves: impl IntoIterator<Item = CandidateMove<F>>) -> Option<CandidateMove<F>> {
    moves
        .into_iter()
        .reduce(|best, m| if compare_moves(&m, &best) == Ordering::Greater { m } else { best })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct MoveKey {
    kind: MoveKind,
    seed: Option<NodeId>,
    edges: Vec<CandidateId>,
}

/// Gains below this are treated as zero (floating-point noise on exact values).
pub(crate) fn gain_is_positive<F: Scalar>(gain: F, n: usize) -> bool {
    gain > F::epsilon() * F::of_usize(64 * n.max(1))
}

/// Budget-feasible greedy progress.
///
/// `remaining == budget − current.cost()`; unconsidered nodes and edges never
/// overlap the current solution.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyState<F> {
    pub current: Solution,
    pub sigma: F,
    pub remaining: Money,
    pub unconsidered_nodes: BTreeSet<NodeId>,
    pub unconsidered_edges: BTreeSet<CandidateId>,
}

/// Evaluates moves against the current solution, memoizing gains until the
/// current solution changes.
struct MoveScorer<'a, F, E: ?Sized> {
    graph: &'a SocialGraph<F>,
    evaluator: &'a E,
    memo: HashMap<MoveKey, F>,
}

impl<'a, F: Scalar, E: SpreadEvaluator<F> + ?Sized> MoveScorer<'a, F, E> {
    fn new(graph: &'a SocialGraph<F>, evaluator: &'a E) -> Self {
        MoveScorer {
            graph,
            evaluator,
            memo: HashMap::new(),
        }
    }

    fn invalidate(&mut self) {
        self.memo.clear();
    }

    /// Fills in `gain` for each move relative to `base` (with spread `base_sigma`).
    fn score(
        &mut self,
        base: &Solution,
        base_sigma: F,
        moves: Vec<CandidateMove<F>>,
    ) -> Result<Vec<CandidateMove<F>>, SpreadError> {
        let graph = self.graph;
        let evaluator = self.evaluator;
        let memo = &self.memo;
        let scored: Vec<(CandidateMove<F>, bool)> = moves
            .into_par_iter()
            .map(|mut m| {
                if let Some(&gain) = memo.get(&m.key()) {
                    m.gain = gain;
                    return Ok((m, false));
                }
                let trial = base.extended(graph, m.seed, &m.edges);
                m.gain = evaluator.sigma(graph, &trial)?.value - base_sigma;
                Ok((m, true))
            })
            .collect::<Result<_, SpreadError>>()?;
        Ok(scored
            .into_iter()
            .map(|(m, fresh)| {
                if fresh {
                    self.memo.insert(m.key(), m.gain);
                }
                m
            })
            .collect())
    }
}

fn seed_move<F: Scalar>(a: NodeId) -> CandidateMove<F> {
    CandidateMove {
        kind: MoveKind::Seed,
        seed: Some(a),
        edges: Vec::new(),
        gain: F::zero(),
        marginal_cost: Money::ONE,
    }
}

fn edge_move<F: Scalar>(graph: &SocialGraph<F>, e: CandidateId) -> CandidateMove<F> {
    CandidateMove {
        kind: MoveKind::Edge,
        seed: None,
        edges: vec![e],
        gain: F::zero(),
        marginal_cost: graph.candidate(e).cost,
    }
}

fn seed_edge_move<F: Scalar>(graph: &SocialGraph<F>, e: CandidateId) -> CandidateMove<F> {
    CandidateMove {
        kind: MoveKind::SeedPlusEdge,
        seed: Some(graph.candidate(e).source),
        edges: vec![e],
        gain: F::zero(),
        marginal_cost: Money::ONE + graph.candidate(e).cost,
    }
}

/// Picks the higher-spread of the greedy result and a fallback; ties keep the greedy result.
fn best_of<F: Scalar>(greedy: (Solution, F), fallback: Option<(Solution, F)>) -> (Solution, F) {
    match fallback {
        Some(fb) if fb.1 > greedy.1 => fb,
        _ => greedy,
    }
}
