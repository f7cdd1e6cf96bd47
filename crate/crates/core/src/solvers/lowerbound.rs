use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use rayon::prelude::*;

use crate::graph::{CandidateId, NodeId, SocialGraph, Solution};
use crate::icm::SpreadEvaluator;
use crate::money::Money;
use crate::scalar::Scalar;

use super::{
    best_move, best_of, compare_moves, edge_move, gain_is_positive, seed_edge_move, seed_move,
    CandidateMove, GreedyState, MoveKind, MoveScorer, SolveError,
};

/// Largest `C(n + m, M)` that [`enum_greedy`] will enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyOptions {
    /// Lazy (CELF) re-evaluation. Same result as eager evaluation when
    /// marginal gains are non-increasing, which holds for exact spread.
    pub lazy: bool,
    pub enumeration_cap: u128,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions {
            lazy: false,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl<F: Scalar> GreedyState<F> {
    /// Starts from `warm` with universes `nodes` and `edges` (minus anything already in `warm`).
    pub fn new<E: SpreadEvaluator<F> + ?Sized>(
        graph: &SocialGraph<F>,
        budget: Money,
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = CandidateId>,
        warm: Solution,
        evaluator: &E,
    ) -> Result<Self, SolveError> {
        let remaining = budget - warm.cost();
        if remaining.is_negative() {
            return Err(SolveError::WarmStartOverBudget {
                cost: warm.cost(),
                budget,
            });
        }
        let unconsidered_nodes = nodes
            .into_iter()
            .filter(|a| !warm.seeds().contains(a))
            .collect();
        let unconsidered_edges = edges
            .into_iter()
            .filter(|e| !warm.edges().contains(e))
            .collect();
        let sigma = evaluator.sigma(graph, &warm)?.value;
        Ok(GreedyState {
            current: warm,
            sigma,
            remaining,
            unconsidered_nodes,
            unconsidered_edges,
        })
    }

    fn commit<E: SpreadEvaluator<F> + ?Sized>(
        &mut self,
        graph: &SocialGraph<F>,
        mv: &CandidateMove<F>,
        evaluator: &E,
    ) -> Result<(), SolveError> {
        self.current = self.current.extended(graph, mv.seed, &mv.edges);
        self.remaining -= mv.marginal_cost;
        self.sigma = evaluator.sigma(graph, &self.current)?.value;
        Ok(())
    }

    fn is_open(&self, graph: &SocialGraph<F>, mv: &CandidateMove<F>) -> bool {
        match mv.kind {
            MoveKind::Seed => self.unconsidered_nodes.contains(&mv.seed.unwrap()),
            MoveKind::Edge => {
                let e = mv.edges[0];
                self.unconsidered_edges.contains(&e)
                    && self.current.seeds().contains(&graph.candidate(e).source)
            }
            MoveKind::SeedPlusEdge => {
                self.unconsidered_edges.contains(&mv.edges[0])
                    && self.unconsidered_nodes.contains(&mv.seed.unwrap())
            }
            MoveKind::SeedPlusBundle => false,
        }
    }
}

/// r1, r2 and r3 moves available from `state`, with zero gains.
fn open_moves<F: Scalar>(graph: &SocialGraph<F>, state: &GreedyState<F>) -> Vec<CandidateMove<F>> {
    let mut moves: Vec<CandidateMove<F>> =
        state.unconsidered_nodes.iter().map(|&a| seed_move(a)).collect();
    for &e in &state.unconsidered_edges {
        let source = graph.candidate(e).source;
        if state.current.seeds().contains(&source) {
            moves.push(edge_move(graph, e));
        } else if state.unconsidered_nodes.contains(&source) {
            moves.push(seed_edge_move(graph, e));
        }
    }
    moves
}

/// Commits `best` if affordable and retires what it considered. Returns whether it committed.
fn apply<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    state: &mut GreedyState<F>,
    best: &CandidateMove<F>,
    evaluator: &E,
) -> Result<bool, SolveError> {
    let affordable = best.marginal_cost <= state.remaining;
    if affordable {
        state.commit(graph, best, evaluator)?;
    }
    match best.kind {
        MoveKind::Seed => {
            state.unconsidered_nodes.remove(&best.seed.unwrap());
        }
        MoveKind::Edge => {
            state.unconsidered_edges.remove(&best.edges[0]);
        }
        MoveKind::SeedPlusEdge => {
            state.unconsidered_edges.remove(&best.edges[0]);
            if affordable {
                state.unconsidered_nodes.remove(&best.seed.unwrap());
            }
        }
        MoveKind::SeedPlusBundle => unreachable!("bundles are not lower-bound moves"),
    }
    Ok(affordable)
}

fn eager_loop<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    state: &mut GreedyState<F>,
    evaluator: &E,
) -> Result<(), SolveError> {
    let n = graph.node_count();
    let mut scorer = MoveScorer::new(graph, evaluator);
    loop {
        let moves = open_moves(graph, state);
        if moves.is_empty() {
            return Ok(());
        }
        let scored = scorer.score(&state.current, state.sigma, moves)?;
        let best = best_move(scored).expect("non-empty");
        // Nothing commits, so every remaining gain stays at or below this one.
        if !gain_is_positive(best.gain, n) {
            return Ok(());
        }
        if apply(graph, state, &best, evaluator)? {
            scorer.invalidate();
        }
    }
}

struct Queued<F> {
    mv: CandidateMove<F>,
    version: u64,
}

impl<F: Scalar> PartialEq for Queued<F> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<F: Scalar> Eq for Queued<F> {}

impl<F: Scalar> PartialOrd for Queued<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<F: Scalar> Ord for Queued<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_moves(&self.mv, &other.mv)
    }
}

fn lazy_loop<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    state: &mut GreedyState<F>,
    evaluator: &E,
) -> Result<(), SolveError> {
    let n = graph.node_count();
    let mut version = 0u64;
    let mut scorer = MoveScorer::new(graph, evaluator);
    let initial = scorer.score(&state.current, state.sigma, open_moves(graph, state))?;
    let mut heap: BinaryHeap<Queued<F>> =
        initial.into_iter().map(|mv| Queued { mv, version }).collect();
    while let Some(Queued { mv, version: seen }) = heap.pop() {
        if !state.is_open(graph, &mv) {
            continue;
        }
        if seen != version {
            let mut fresh = scorer.score(&state.current, state.sigma, vec![mv])?;
            heap.push(Queued {
                mv: fresh.pop().expect("one move"),
                version,
            });
            continue;
        }
        if !gain_is_positive(mv.gain, n) {
            return Ok(());
        }
        if apply(graph, state, &mv, evaluator)? {
            version += 1;
            scorer.invalidate();
            if let Some(a) = mv.seed {
                let unlocked: Vec<CandidateMove<F>> = graph
                    .candidates_from(a)
                    .iter()
                    .filter(|e| state.unconsidered_edges.contains(e))
                    .map(|&e| edge_move(graph, e))
                    .collect();
                for mv in scorer.score(&state.current, state.sigma, unlocked)? {
                    heap.push(Queued { mv, version });
                }
            }
        }
    }
    Ok(())
}

fn run_loop<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    state: &mut GreedyState<F>,
    evaluator: &E,
    options: GreedyOptions,
) -> Result<(), SolveError> {
    if options.lazy {
        lazy_loop(graph, state, evaluator)
    } else {
        eager_loop(graph, state, evaluator)
    }
}

/// Best affordable single seed with a single edge from it, or the best
/// single seed when no such pair fits in `budget`.
fn best_pair<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    budget: Money,
    evaluator: &E,
) -> Result<Option<(Solution, F)>, SolveError> {
    let mut options: Vec<Solution> = Vec::new();
    for a in graph.nodes() {
        for &e in graph.candidates_from(a) {
            if Money::ONE + graph.candidate(e).cost <= budget {
                options.push(Solution::empty().extended(graph, Some(a), &[e]));
            }
        }
    }
    if options.is_empty() && Money::ONE <= budget {
        options = graph.nodes().map(|a| Solution::empty().with_seed(a)).collect();
    }
    best_by_sigma(graph, options, evaluator)
}

/// The σ-maximal solution, earliest on ties.
pub(super) fn best_by_sigma<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    options: Vec<Solution>,
    evaluator: &E,
) -> Result<Option<(Solution, F)>, SolveError> {
    let values: Vec<F> = options
        .par_iter()
        .map(|s| evaluator.sigma(graph, s).map(|est| est.value))
        .collect::<Result<_, _>>()?;
    Ok(options
        .into_iter()
        .zip(values)
        .reduce(|best, cand| if cand.1 > best.1 { cand } else { best }))
}

/// Three-ratio greedy: repeatedly adds the best seed, edge from a seed, or
/// seed-plus-edge by gain per unit cost, then returns the better of that and
/// the best affordable single seed-plus-edge pair.
pub fn greedy_lb<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    budget: Money,
    evaluator: &E,
    options: GreedyOptions,
) -> Result<Solution, SolveError> {
    let mut state = GreedyState::new(
        graph,
        budget,
        graph.nodes(),
        graph.candidate_ids(),
        Solution::empty(),
        evaluator,
    )?;
    run_loop(graph, &mut state, evaluator, options)?;
    let fallback = best_pair(graph, budget, evaluator)?;
    Ok(best_of((state.current, state.sigma), fallback).0)
}

/// The greedy loop of [`greedy_lb`] started from `warm`, drawing only from
/// `nodes` and `edges`. No fallback comparison.
pub fn greedy_lb_restricted<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    budget: Money,
    evaluator: &E,
    nodes: &BTreeSet<NodeId>,
    edges: &BTreeSet<CandidateId>,
    warm: &Solution,
    options: GreedyOptions,
) -> Result<Solution, SolveError> {
    let mut state = GreedyState::new(
        graph,
        budget,
        nodes.iter().copied(),
        edges.iter().copied(),
        warm.clone(),
        evaluator,
    )?;
    run_loop(graph, &mut state, evaluator, options)?;
    Ok(state.current)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

/// Every feasible solution with `|A| + |S| <= max_size`, seeds-major in lexicographic order.
fn small_solutions<F: Scalar>(
    graph: &SocialGraph<F>,
    budget: Money,
    max_size: usize,
) -> Vec<Solution> {
    fn seeds_rec<F: Scalar>(
        graph: &SocialGraph<F>,
        budget: Money,
        max_size: usize,
        next: u32,
        seeds: &mut Vec<NodeId>,
        out: &mut Vec<Solution>,
    ) {
        let pool: Vec<CandidateId> = seeds
            .iter()
            .flat_map(|&a| graph.candidates_from(a).iter().copied())
            .collect();
        let base = Solution::new(graph, seeds.iter().copied(), []).expect("seeds exist");
        edges_rec(graph, budget, max_size, &pool, 0, &base, out);
        if seeds.len() == max_size {
            return;
        }
        for a in next..graph.node_count() as u32 {
            if Money::from_units(seeds.len() as i64 + 1) > budget {
                break;
            }
            seeds.push(NodeId(a));
            seeds_rec(graph, budget, max_size, a + 1, seeds, out);
            seeds.pop();
        }
    }

    fn edges_rec<F: Scalar>(
        graph: &SocialGraph<F>,
        budget: Money,
        max_size: usize,
        pool: &[CandidateId],
        from: usize,
        current: &Solution,
        out: &mut Vec<Solution>,
    ) {
        out.push(current.clone());
        if current.size() == max_size {
            return;
        }
        for i in from..pool.len() {
            if current.cost() + graph.candidate(pool[i]).cost <= budget {
                let next = current.extended(graph, None, &[pool[i]]);
                edges_rec(graph, budget, max_size, pool, i + 1, &next, out);
            }
        }
    }

    let mut out = Vec::new();
    seeds_rec(graph, budget, max_size, 0, &mut Vec::new(), &mut out);
    out
}

/// Partial enumeration: the best feasible solution with fewer than `prefix`
/// elements, or the best greedy completion of a feasible solution with
/// exactly `prefix` elements.
pub fn enum_greedy<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    budget: Money,
    prefix: usize,
    evaluator: &E,
    options: GreedyOptions,
) -> Result<Solution, SolveError> {
    if prefix == 0 {
        return Err(SolveError::InvalidPrefixSize);
    }
    let elements = graph.node_count() + graph.candidates().len();
    let count = binomial(elements, prefix);
    if count > options.enumeration_cap {
        return Err(SolveError::EnumerationCap {
            size: prefix,
            elements,
            count,
            cap: options.enumeration_cap,
        });
    }
    let (small, full): (Vec<Solution>, Vec<Solution>) = small_solutions(graph, budget, prefix)
        .into_iter()
        .partition(|s| s.size() < prefix);
    let best_small = best_by_sigma(graph, small, evaluator)?.expect("the empty solution is feasible");

    let all_nodes: BTreeSet<NodeId> = graph.nodes().collect();
    let all_edges: BTreeSet<CandidateId> = graph.candidate_ids().collect();
    let completed: Vec<(Solution, F)> = full
        .par_iter()
        .map(|p| {
            let nodes = all_nodes.difference(p.seeds()).copied().collect();
            let edges = all_edges.difference(p.edges()).copied().collect();
            let sol = greedy_lb_restricted(graph, budget, evaluator, &nodes, &edges, p, options)?;
            let sigma = evaluator.sigma(graph, &sol)?.value;
            Ok((sol, sigma))
        })
        .collect::<Result<_, SolveError>>()?;
    let best_full = completed
        .into_iter()
        .reduce(|best, cand| if cand.1 > best.1 { cand } else { best });
    Ok(best_of(best_small, best_full).0)
}

/// Classic hill-climbing over seeds only, up to `floor(budget)` seeds.
pub fn greedy_seed_only<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    budget: Money,
    evaluator: &E,
) -> Result<Solution, SolveError> {
    let n = graph.node_count();
    let mut state = GreedyState::new(
        graph,
        budget,
        graph.nodes(),
        std::iter::empty(),
        Solution::empty(),
        evaluator,
    )?;
    let mut scorer = MoveScorer::new(graph, evaluator);
    while state.remaining >= Money::ONE && !state.unconsidered_nodes.is_empty() {
        let moves = state.unconsidered_nodes.iter().map(|&a| seed_move(a)).collect();
        let scored = scorer.score(&state.current, state.sigma, moves)?;
        let best = best_move(scored).expect("non-empty");
        if !gain_is_positive(best.gain, n) {
            break;
        }
        state.commit(graph, &best, evaluator)?;
        state.unconsidered_nodes.remove(&best.seed.unwrap());
        scorer.invalidate();
    }
    Ok(state.current)
}
