use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::bounds::{alpha_for_threshold, optimal_b};
use crate::graph::{CandidateId, NodeId, SocialGraph, Solution};
use crate::icm::SpreadEvaluator;
use crate::money::Money;
use crate::scalar::Scalar;

use super::lowerbound::best_by_sigma;
use super::{
    best_move, best_of, edge_move, gain_is_positive, seed_edge_move, seed_move, CandidateMove,
    GreedyState, MoveKind, MoveScorer, SolveError,
};

/// Splits candidate edges into cheap (`cost < b`) and expensive (`cost >= b`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    pub b: f64,
    /// Approximation factor of the bundle sub-solver.
    pub alpha: f64,
}

impl ThresholdConfig {
    pub fn new(b: f64) -> Result<Self, SolveError> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(SolveError::InvalidThreshold(b));
        }
        Ok(ThresholdConfig {
            b,
            alpha: alpha_for_threshold(b),
        })
    }

    /// The threshold maximizing the guaranteed factor.
    pub fn optimal() -> Self {
        let (b, _) = optimal_b::<f64>();
        Self::new(b).expect("optimal b is positive")
    }

    /// Largest cost still counted as cheap.
    pub fn cheap_cap(&self) -> Money {
        Money::strictly_below(self.b)
    }

    pub fn is_cheap(&self, cost: Money) -> bool {
        cost <= self.cheap_cap()
    }
}

/// Cost-ratio greedy over `pool` starting from `base`, compared against the
/// best single affordable edge. Returns the bought edges and the resulting spread.
fn costima_from<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    base: &Solution,
    base_sigma: F,
    pool: &[CandidateId],
    budget: Money,
    evaluator: &E,
) -> Result<(Solution, F), SolveError> {
    let n = graph.node_count();
    let mut scorer = MoveScorer::new(graph, evaluator);
    let mut current = base.clone();
    let mut sigma = base_sigma;
    let mut remaining = budget;
    let mut open: BTreeSet<CandidateId> = pool.iter().copied().collect();
    while !open.is_empty() {
        let moves = open.iter().map(|&e| edge_move(graph, e)).collect();
        let scored = scorer.score(&current, sigma, moves)?;
        let best = best_move(scored).expect("non-empty");
        if !gain_is_positive(best.gain, n) {
            break;
        }
        if best.marginal_cost <= remaining {
            current = current.extended(graph, None, &best.edges);
            remaining -= best.marginal_cost;
            sigma = evaluator.sigma(graph, &current)?.value;
            scorer.invalidate();
        }
        open.remove(&best.edges[0]);
    }
    let singles = pool
        .iter()
        .filter(|&&e| graph.candidate(e).cost <= budget)
        .map(|&e| base.extended(graph, None, &[e]))
        .collect();
    Ok(best_of((current, sigma), best_by_sigma(graph, singles, evaluator)?))
}

/// Greedy edge purchase for a fixed seed set: buys candidate edges leaving
/// `seeds` by gain per unit cost within `budget`, or the single best
/// affordable edge when that spreads further.
pub fn costima_greedy<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    seeds: &BTreeSet<NodeId>,
    budget: Money,
    evaluator: &E,
) -> Result<BTreeSet<CandidateId>, SolveError> {
    let base = Solution::new(graph, seeds.iter().copied(), [])?;
    let base_sigma = evaluator.sigma(graph, &base)?.value;
    let pool: Vec<CandidateId> = seeds
        .iter()
        .flat_map(|&a| graph.candidates_from(a).iter().copied())
        .collect();
    let (sol, _) = costima_from(graph, &base, base_sigma, &pool, budget, evaluator)?;
    Ok(sol.edges().clone())
}

/// Seed-plus-cheap-bundle moves for every node in `nodes`, in node order.
fn bundle_moves<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    current: &Solution,
    current_sigma: F,
    nodes: &[NodeId],
    open_edges: &BTreeSet<CandidateId>,
    threshold: &ThresholdConfig,
    evaluator: &E,
) -> Result<Vec<CandidateMove<F>>, SolveError> {
    let cap = threshold.cheap_cap();
    nodes
        .par_iter()
        .map(|&a| {
            let base = current.with_seed(a);
            let base_sigma = evaluator.sigma(graph, &base)?.value;
            let pool: Vec<CandidateId> = graph
                .candidates_from(a)
                .iter()
                .copied()
                .filter(|e| open_edges.contains(e) && threshold.is_cheap(graph.candidate(*e).cost))
                .collect();
            let (sol, sigma) = costima_from(graph, &base, base_sigma, &pool, cap, evaluator)?;
            let bundle: Vec<CandidateId> = sol.edges().difference(current.edges()).copied().collect();
            Ok(CandidateMove {
                kind: MoveKind::SeedPlusBundle,
                seed: Some(a),
                marginal_cost: sol.cost() - current.cost(),
                edges: bundle,
                gain: sigma - current_sigma,
            })
        })
        .collect()
}

/// Best seed from `nodes` together with a bundle of cheap edges from it (total
/// bundle cost below `b`), ranked by gain over `current` per unit cost.
/// `None` when `nodes` is empty.
pub fn rbima_solve<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    current: &Solution,
    nodes: &BTreeSet<NodeId>,
    threshold: &ThresholdConfig,
    evaluator: &E,
) -> Result<Option<CandidateMove<F>>, SolveError> {
    let current_sigma = evaluator.sigma(graph, current)?.value;
    let nodes: Vec<NodeId> = nodes
        .iter()
        .copied()
        .filter(|a| !current.seeds().contains(a))
        .collect();
    let open: BTreeSet<CandidateId> = graph
        .candidate_ids()
        .filter(|e| !current.edges().contains(e))
        .collect();
    let moves = bundle_moves(graph, current, current_sigma, &nodes, &open, threshold, evaluator)?;
    Ok(best_move(moves))
}

/// Four-move greedy: seeds, edges from seeds, a seed with one expensive edge,
/// or a seed with a bundle of cheap edges, ranked by gain per unit cost; then
/// the better of that and the best affordable single-seed solution.
pub fn greedy_general<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    budget: Money,
    threshold: &ThresholdConfig,
    evaluator: &E,
) -> Result<Solution, SolveError> {
    let n = graph.node_count();
    let mut state = GreedyState::new(
        graph,
        budget,
        graph.nodes(),
        graph.candidate_ids(),
        Solution::empty(),
        evaluator,
    )?;
    let mut scorer = MoveScorer::new(graph, evaluator);
    let mut bundles: BTreeMap<NodeId, CandidateMove<F>> = BTreeMap::new();
    loop {
        let mut moves: Vec<CandidateMove<F>> =
            state.unconsidered_nodes.iter().map(|&a| seed_move(a)).collect();
        for &e in &state.unconsidered_edges {
            let edge = graph.candidate(e);
            if state.current.seeds().contains(&edge.source) {
                moves.push(edge_move(graph, e));
            } else if state.unconsidered_nodes.contains(&edge.source) && !threshold.is_cheap(edge.cost) {
                moves.push(seed_edge_move(graph, e));
            }
        }
        if moves.is_empty() {
            break;
        }
        let mut scored = scorer.score(&state.current, state.sigma, moves)?;

        let missing: Vec<NodeId> = state
            .unconsidered_nodes
            .iter()
            .copied()
            .filter(|a| !bundles.contains_key(a))
            .collect();
        let fresh = bundle_moves(
            graph,
            &state.current,
            state.sigma,
            &missing,
            &state.unconsidered_edges,
            threshold,
            evaluator,
        )?;
        bundles.extend(missing.into_iter().zip(fresh));
        scored.extend(
            state
                .unconsidered_nodes
                .iter()
                .map(|a| bundles[a].clone()),
        );

        let best = best_move(scored).expect("non-empty");
        if !gain_is_positive(best.gain, n) {
            break;
        }
        let affordable = best.marginal_cost <= state.remaining;
        if affordable {
            state.current = state.current.extended(graph, best.seed, &best.edges);
            state.remaining -= best.marginal_cost;
            state.sigma = evaluator.sigma(graph, &state.current)?.value;
            scorer.invalidate();
            bundles.clear();
        }
        if let Some(a) = best.seed {
            state.unconsidered_nodes.remove(&a);
            bundles.remove(&a);
        }
        for e in &best.edges {
            state.unconsidered_edges.remove(e);
        }
    }

    let fallback = general_fallback(graph, budget, threshold, evaluator)?;
    Ok(best_of((state.current, state.sigma), fallback).0)
}

/// Best single seed with either one affordable expensive edge or a greedy
/// cheap bundle that fits the budget.
fn general_fallback<F: Scalar, E: SpreadEvaluator<F> + ?Sized>(
    graph: &SocialGraph<F>,
    budget: Money,
    threshold: &ThresholdConfig,
    evaluator: &E,
) -> Result<Option<(Solution, F)>, SolveError> {
    if budget < Money::ONE {
        return Ok(None);
    }
    let bundle_budget = threshold.cheap_cap().min(budget - Money::ONE);
    let per_seed: Vec<Vec<Solution>> = graph
        .nodes()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&a| {
            let base = Solution::empty().with_seed(a);
            let mut options: Vec<Solution> = graph
                .candidates_from(a)
                .iter()
                .filter(|&&e| {
                    let c = graph.candidate(e).cost;
                    !threshold.is_cheap(c) && Money::ONE + c <= budget
                })
                .map(|&e| base.extended(graph, None, &[e]))
                .collect();
            let pool: Vec<CandidateId> = graph
                .candidates_from(a)
                .iter()
                .copied()
                .filter(|&e| threshold.is_cheap(graph.candidate(e).cost))
                .collect();
            let base_sigma = evaluator.sigma(graph, &base)?.value;
            let (bundle, _) = costima_from(graph, &base, base_sigma, &pool, bundle_budget, evaluator)?;
            options.push(bundle);
            Ok(options)
        })
        .collect::<Result<_, SolveError>>()?;
    best_by_sigma(graph, per_seed.into_iter().flatten().collect(), evaluator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::icm::{sigma_exact, ExactEvaluator};
    use crate::solvers::{greedy_seed_only, MoveKind};

    fn m(s: &str) -> Money {
        s.parse().unwrap()
    }

    fn sigma(g: &SocialGraph<f64>, sol: &Solution) -> f64 {
        sigma_exact(g, sol, 20).unwrap().value
    }

    #[test]
    fn threshold_validation() {
        assert!(ThresholdConfig::new(0.0).is_err());
        assert!(ThresholdConfig::new(f64::NAN).is_err());
        let t = ThresholdConfig::new(1.0).unwrap();
        assert!(t.is_cheap(m("0.999999")));
        assert!(!t.is_cheap(m("1")));
        let opt = ThresholdConfig::optimal();
        assert!((opt.b - 1.6224).abs() < 1e-3);
        assert!((opt.alpha - (1.0 - (-1.0f64).exp()) / (opt.b + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn costima_prefers_certain_edge() {
        let mut b = GraphBuilder::new();
        let a = b.node("a");
        let x = b.node("x");
        let y = b.node("y");
        let ax = b.candidate(a, x, 1.0, m("0.5")).unwrap();
        b.candidate(a, y, 0.5, m("0.5")).unwrap();
        let g = b.build();
        let seeds = BTreeSet::from([a]);
        let eval = ExactEvaluator::default();
        let bought = costima_greedy(&g, &seeds, m("0.5"), &eval).unwrap();
        assert_eq!(bought, BTreeSet::from([ax]));

        let all = costima_greedy(&g, &seeds, m("1"), &eval).unwrap();
        assert_eq!(all.len(), 2);
        assert!(costima_greedy(&g, &seeds, Money::ZERO, &eval).unwrap().is_empty());
    }

    #[test]
    fn costima_skips_useless_edges() {
        let mut b = GraphBuilder::with_nodes(3);
        b.candidate(NodeId(0), NodeId(1), 0.0, m("0.1")).unwrap();
        b.candidate(NodeId(0), NodeId(2), 0.0, m("0.1")).unwrap();
        let g = b.build();
        let bought = costima_greedy(&g, &BTreeSet::from([NodeId(0)]), m("5"), &ExactEvaluator::default()).unwrap();
        assert!(bought.is_empty());
    }

    #[test]
    fn rbima_single_cheap_edge() {
        let mut b = GraphBuilder::with_nodes(2);
        b.candidate(NodeId(0), NodeId(1), 1.0, m("0.2")).unwrap();
        let g = b.build();
        let t = ThresholdConfig::new(1.0).unwrap();
        let mv = rbima_solve(&g, &Solution::empty(), &BTreeSet::from([NodeId(0)]), &t, &ExactEvaluator::default())
            .unwrap()
            .unwrap();
        assert_eq!(mv.kind, MoveKind::SeedPlusBundle);
        assert_eq!(mv.gain, 2.0);
        assert_eq!(mv.marginal_cost, m("1.2"));
        assert!((mv.ratio() - 2.0f64 / 1.2).abs() < 1e-15);
        assert!(rbima_solve(&g, &Solution::empty(), &BTreeSet::new(), &t, &ExactEvaluator::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn rbima_without_cheap_edges_is_seed_only() {
        let mut b = GraphBuilder::with_nodes(2);
        b.candidate(NodeId(0), NodeId(1), 1.0, m("0.8")).unwrap();
        let g = b.build();
        let t = ThresholdConfig::new(0.5).unwrap();
        let mv = rbima_solve(&g, &Solution::empty(), &BTreeSet::from([NodeId(0)]), &t, &ExactEvaluator::default())
            .unwrap()
            .unwrap();
        assert!(mv.edges.is_empty());
        assert_eq!(mv.gain, 1.0);
        assert_eq!(mv.marginal_cost, Money::ONE);
    }

    #[test]
    fn bundles_respect_threshold() {
        let mut b = GraphBuilder::with_nodes(5);
        for v in 1..5 {
            b.candidate(NodeId(0), NodeId(v), 1.0, m("0.3")).unwrap();
        }
        let g = b.build();
        let t = ThresholdConfig::new(1.0).unwrap();
        let mv = rbima_solve(&g, &Solution::empty(), &BTreeSet::from([NodeId(0)]), &t, &ExactEvaluator::default())
            .unwrap()
            .unwrap();
        // three edges cost 0.9 < 1; a fourth would reach 1.2
        assert_eq!(mv.edges.len(), 3);
        assert!(mv.marginal_cost - Money::ONE < Money::ONE);
    }

    #[test]
    fn general_on_chain() {
        let mut b = GraphBuilder::new();
        let s = b.node("s");
        let x = b.node("x");
        let y = b.node("y");
        b.edge(x, y, 1.0).unwrap();
        b.candidate(s, x, 1.0, m("0.4")).unwrap();
        let g = b.build();
        let sol = greedy_general(&g, m("1.5"), &ThresholdConfig::optimal(), &ExactEvaluator::default()).unwrap();
        assert_eq!(sigma(&g, &sol), 3.0);
        sol.validate(&g, m("1.5")).unwrap();
    }

    #[test]
    fn worthless_edges_reduce_to_hill_climbing() {
        let mut b = GraphBuilder::with_nodes(5);
        b.edge(NodeId(0), NodeId(1), 0.6).unwrap();
        b.edge(NodeId(1), NodeId(2), 0.6).unwrap();
        b.edge(NodeId(3), NodeId(4), 0.3).unwrap();
        b.candidate(NodeId(4), NodeId(0), 0.0, m("0.2")).unwrap();
        b.candidate(NodeId(2), NodeId(3), 0.0, m("0.7")).unwrap();
        let g = b.build();
        let eval = ExactEvaluator::default();
        for k in ["1", "2", "3.5"] {
            let general = greedy_general(&g, m(k), &ThresholdConfig::optimal(), &eval).unwrap();
            let seeds = greedy_seed_only(&g, m(k), &eval).unwrap();
            assert_eq!(general.seeds(), seeds.seeds(), "k = {k}");
            assert!(general.edges().is_empty());
        }
    }
}
